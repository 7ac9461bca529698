#pragma once

// Umbrella header.

#include "radlabel/classify.hpp"
#include "radlabel/config.hpp"
#include "radlabel/corpus.hpp"
#include "radlabel/error.hpp"
#include "radlabel/eval.hpp"
#include "radlabel/labels.hpp"
#include "radlabel/lda.hpp"
#include "radlabel/matrix.hpp"
#include "radlabel/pipeline.hpp"
#include "radlabel/random.hpp"
#include "radlabel/regress.hpp"
#include "radlabel/stemmer.hpp"
#include "radlabel/synth.hpp"
#include "radlabel/text.hpp"
#include "radlabel/topics.hpp"
