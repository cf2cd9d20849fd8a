#pragma once

// Umbrella header for the model stability analysis library.

#include "msa/assembly.hpp"
#include "msa/cholesky.hpp"
#include "msa/conditioning.hpp"
#include "msa/dense.hpp"
#include "msa/digest.hpp"
#include "msa/eigen.hpp"
#include "msa/errors.hpp"
#include "msa/model.hpp"
#include "msa/report.hpp"
#include "msa/sparse.hpp"
#include "msa/stability.hpp"
