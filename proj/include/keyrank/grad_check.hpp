#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "keyrank/param.hpp"

namespace keyrank {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  long evals = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  long evals = 0;

  void add(GradCheckEntry e) {
    max_rel_err = std::max(max_rel_err, e.max_rel_err);
    evals += e.evals;
    entries.push_back(std::move(e));
  }

  void merge(const GradCheckReport& other) {
    for (const GradCheckEntry& e : other.entries) add(e);
  }
};

inline double grad_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Central differences against a supplied analytic gradient at a point.
inline GradCheckEntry grad_check(const std::function<double(const Vec&)>& f, const Vec& point,
                                 const Vec& analytic, double h = 1e-4,
                                 const std::string& name = "f") {
  GradCheckEntry e{name, 0.0, 0};
  Vec x = point;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    const double numeric = (fp - fm) / (2.0 * h);
    e.max_rel_err = std::max(e.max_rel_err, grad_rel_err(analytic[i], numeric));
    e.evals += 2;
  }
  return e;
}

/// Checks one parameter whose analytic gradient is already accumulated in
/// p.grad; loss must be a pure forward evaluation of the same scalar.
inline GradCheckEntry check_param_gradients(Parameter& p, const std::function<double()>& loss,
                                            double h = 1e-4) {
  GradCheckEntry e{p.name, 0.0, 0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p.value.a[i];
    p.value.a[i] = keep + h;
    const double fp = loss();
    p.value.a[i] = keep - h;
    const double fm = loss();
    p.value.a[i] = keep;
    const double numeric = (fp - fm) / (2.0 * h);
    e.max_rel_err = std::max(e.max_rel_err, grad_rel_err(p.grad.a[i], numeric));
    e.evals += 2;
  }
  return e;
}

inline GradCheckReport check_all_params(const std::vector<Parameter*>& params,
                                        const std::function<double()>& loss, double h = 1e-4) {
  GradCheckReport r;
  for (Parameter* p : params) r.add(check_param_gradients(*p, loss, h));
  return r;
}

}  // namespace keyrank
