#pragma once

#include "stllab/error.hpp"
#include "stllab/format.hpp"
#include "stllab/random.hpp"
#include "stllab/parallel.hpp"
#include "stllab/plate.hpp"
#include "stllab/quadrature.hpp"
#include "stllab/spectrum.hpp"
#include "stllab/infinite_plate.hpp"
#include "stllab/radiation.hpp"
#include "stllab/modal.hpp"
#include "stllab/diffuse.hpp"
#include "stllab/dataset.hpp"
#include "stllab/preprocess.hpp"
#include "stllab/cart.hpp"
#include "stllab/forest.hpp"
#include "stllab/boosting.hpp"
#include "stllab/mlp.hpp"
#include "stllab/lbfgsb.hpp"
#include "stllab/gpr.hpp"
#include "stllab/surrogate.hpp"
#include "stllab/sensitivity.hpp"
#include "stllab/evaluation.hpp"
