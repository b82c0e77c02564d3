#pragma once

// Umbrella header: margin-based bitext mining over sentence embeddings plus
// the iterative mine-then-align loop, with built-in toy embedders and a
// synthetic multilingual world for desk-scale experiments.

#include "criss/config.hpp"
#include "criss/corpus.hpp"
#include "criss/error.hpp"
#include "criss/evalkit.hpp"
#include "criss/io.hpp"
#include "criss/ivf.hpp"
#include "criss/knn.hpp"
#include "criss/loop.hpp"
#include "criss/margin.hpp"
#include "criss/matrix.hpp"
#include "criss/miner.hpp"
#include "criss/parallel.hpp"
#include "criss/procrustes.hpp"
#include "criss/rng.hpp"
#include "criss/synthetic.hpp"
#include "criss/toy_embed.hpp"
#include "criss/version.hpp"
