#pragma once

#include "framelab/augmentation.hpp"
#include "framelab/error.hpp"
#include "framelab/frame.hpp"
#include "framelab/matrix.hpp"
#include "framelab/naimark.hpp"
#include "framelab/numerics.hpp"
#include "framelab/parallel.hpp"
#include "framelab/phase_retrieval.hpp"
#include "framelab/random.hpp"
#include "framelab/riesz_projection.hpp"
#include "framelab/scalar.hpp"
#include "framelab/spark.hpp"
