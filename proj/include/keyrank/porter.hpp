#pragma once

#include <string>

namespace keyrank {

namespace porter_detail {

// Classic Porter (1980). Works on a lowercase a-z buffer; k is the index of
// the last live character, j marks the end of the stem for the current rule.
class Stemmer {
 public:
  explicit Stemmer(const std::string& word) : b_(word), k_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    step1c();
    step2();
    step3();
    step4();
    step5();
    return b_.substr(0, k_ + 1);
  }

 private:
  std::string b_;
  int k_ = -1;
  int j_ = 0;

  bool cons(int i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_consonant(int i) const {
    if (i < 1) return false;
    if (b_[i] != b_[i - 1]) return false;
    return cons(i);
  }

  // consonant-vowel-consonant ending at i, final consonant not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(const char* s, int len) {
    if (len > k_ + 1) return false;
    if (b_.compare(k_ - len + 1, len, s) != 0) return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(const char* s, int len) {
    b_.replace(j_ + 1, b_.size() - j_ - 1, s, len);
    k_ = j_ + len;
  }

  void replace_if_m_positive(const char* s, int len) {
    if (m() > 0) set_to(s, len);
  }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses", 4)) {
        k_ -= 2;
      } else if (ends("ies", 3)) {
        set_to("i", 1);
      } else if (b_[k_ - 1] != 's') {
        --k_;
      }
    }
    if (ends("eed", 3)) {
      if (m() > 0) --k_;
    } else if ((ends("ed", 2) || ends("ing", 3)) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at", 2)) {
        set_to("ate", 3);
      } else if (ends("bl", 2)) {
        set_to("ble", 3);
      } else if (ends("iz", 2)) {
        set_to("ize", 3);
      } else if (double_consonant(k_)) {
        --k_;
        const char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else if (m() == 1 && cvc(k_)) {
        set_to("e", 1);
      }
    }
  }

  void step1c() {
    if (ends("y", 1) && vowel_in_stem()) b_[k_] = 'i';
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("ational", 7)) replace_if_m_positive("ate", 3);
        else if (ends("tional", 6)) replace_if_m_positive("tion", 4);
        break;
      case 'c':
        if (ends("enci", 4)) replace_if_m_positive("ence", 4);
        else if (ends("anci", 4)) replace_if_m_positive("ance", 4);
        break;
      case 'e':
        if (ends("izer", 4)) replace_if_m_positive("ize", 3);
        break;
      case 'l':
        if (ends("abli", 4)) replace_if_m_positive("able", 4);
        else if (ends("alli", 4)) replace_if_m_positive("al", 2);
        else if (ends("entli", 5)) replace_if_m_positive("ent", 3);
        else if (ends("eli", 3)) replace_if_m_positive("e", 1);
        else if (ends("ousli", 5)) replace_if_m_positive("ous", 3);
        break;
      case 'o':
        if (ends("ization", 7)) replace_if_m_positive("ize", 3);
        else if (ends("ation", 5)) replace_if_m_positive("ate", 3);
        else if (ends("ator", 4)) replace_if_m_positive("ate", 3);
        break;
      case 's':
        if (ends("alism", 5)) replace_if_m_positive("al", 2);
        else if (ends("iveness", 7)) replace_if_m_positive("ive", 3);
        else if (ends("fulness", 7)) replace_if_m_positive("ful", 3);
        else if (ends("ousness", 7)) replace_if_m_positive("ous", 3);
        break;
      case 't':
        if (ends("aliti", 5)) replace_if_m_positive("al", 2);
        else if (ends("iviti", 5)) replace_if_m_positive("ive", 3);
        else if (ends("biliti", 6)) replace_if_m_positive("ble", 3);
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[k_]) {
      case 'e':
        if (ends("icate", 5)) replace_if_m_positive("ic", 2);
        else if (ends("ative", 5)) replace_if_m_positive("", 0);
        else if (ends("alize", 5)) replace_if_m_positive("al", 2);
        break;
      case 'i':
        if (ends("iciti", 5)) replace_if_m_positive("ic", 2);
        break;
      case 'l':
        if (ends("ical", 4)) replace_if_m_positive("ic", 2);
        else if (ends("ful", 3)) replace_if_m_positive("", 0);
        break;
      case 's':
        if (ends("ness", 4)) replace_if_m_positive("", 0);
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("al", 2)) break;
        return;
      case 'c':
        if (ends("ance", 4)) break;
        if (ends("ence", 4)) break;
        return;
      case 'e':
        if (ends("er", 2)) break;
        return;
      case 'i':
        if (ends("ic", 2)) break;
        return;
      case 'l':
        if (ends("able", 4)) break;
        if (ends("ible", 4)) break;
        return;
      case 'n':
        if (ends("ant", 3)) break;
        if (ends("ement", 5)) break;
        if (ends("ment", 4)) break;
        if (ends("ent", 3)) break;
        return;
      case 'o':
        if (ends("ion", 3) && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
        if (ends("ou", 2)) break;
        return;
      case 's':
        if (ends("ism", 3)) break;
        return;
      case 't':
        if (ends("ate", 3)) break;
        if (ends("iti", 3)) break;
        return;
      case 'u':
        if (ends("ous", 3)) break;
        return;
      case 'v':
        if (ends("ive", 3)) break;
        return;
      case 'z':
        if (ends("ize", 3)) break;
        return;
      default:
        return;
    }
    if (m() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && double_consonant(k_) && m() > 1) --k_;
  }
};

}  // namespace porter_detail

/// Porter stem of a lowercase word; tokens containing anything outside a-z
/// are returned unchanged.
inline std::string stem(const std::string& word) {
  for (const char ch : word) {
    if (ch < 'a' || ch > 'z') return word;
  }
  if (word.size() <= 2) return word;
  return porter_detail::Stemmer(word).run();
}

}  // namespace keyrank
