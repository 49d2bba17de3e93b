#pragma once

#include "keyrank/adamw.hpp"
#include "keyrank/candidates.hpp"
#include "keyrank/checkpoint.hpp"
#include "keyrank/common.hpp"
#include "keyrank/config.hpp"
#include "keyrank/corpus.hpp"
#include "keyrank/encoder.hpp"
#include "keyrank/extract.hpp"
#include "keyrank/grad_check.hpp"
#include "keyrank/gradsuite.hpp"
#include "keyrank/heads.hpp"
#include "keyrank/mat.hpp"
#include "keyrank/metrics.hpp"
#include "keyrank/model.hpp"
#include "keyrank/ops.hpp"
#include "keyrank/param.hpp"
#include "keyrank/porter.hpp"
#include "keyrank/synth.hpp"
#include "keyrank/tfidf.hpp"
#include "keyrank/tokenizer.hpp"
#include "keyrank/trainer.hpp"
#include "keyrank/vocab.hpp"
