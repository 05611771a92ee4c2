#pragma once

#include "corpus.hpp"
#include "error.hpp"
#include "feature_rank.hpp"
#include "features.hpp"
#include "folds.hpp"
#include "logistic_regression.hpp"
#include "metrics.hpp"
#include "naive_bayes.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "protocol.hpp"
#include "random.hpp"
#include "sparse_vector.hpp"
#include "synth.hpp"
#include "topic_model.hpp"
#include "vectorize.hpp"
#include "vocabulary.hpp"
