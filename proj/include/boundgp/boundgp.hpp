#ifndef BOUNDGP_BOUNDGP_HPP
#define BOUNDGP_BOUNDGP_HPP

#include "boundgp/basis_cache.hpp"
#include "boundgp/benchmark.hpp"
#include "boundgp/csv.hpp"
#include "boundgp/domain_grid.hpp"
#include "boundgp/eigenbasis.hpp"
#include "boundgp/eigensolver.hpp"
#include "boundgp/errors.hpp"
#include "boundgp/full_gp.hpp"
#include "boundgp/gp_regression.hpp"
#include "boundgp/lbfgs.hpp"
#include "boundgp/quadrature.hpp"
#include "boundgp/spectral.hpp"
#include "boundgp/stencil.hpp"
#include "boundgp/synthetic.hpp"
#include "boundgp/variational.hpp"

#endif
