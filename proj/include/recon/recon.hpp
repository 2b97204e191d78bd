#pragma once

#include "recon/bench.hpp"
#include "recon/direct.hpp"
#include "recon/error.hpp"
#include "recon/fft.hpp"
#include "recon/fourier_slice.hpp"
#include "recon/grid.hpp"
#include "recon/linear_map.hpp"
#include "recon/operators.hpp"
#include "recon/phantom.hpp"
#include "recon/prox.hpp"
#include "recon/random.hpp"
#include "recon/solvers.hpp"
#include "recon/transforms.hpp"
#include "recon/vec.hpp"

#define RECON_VERSION "0.1.0"
