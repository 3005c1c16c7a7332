#pragma once

#include "acceptance.hpp"
#include "bernstein.hpp"
#include "distributions.hpp"
#include "intertwining.hpp"
#include "localtime_krein.hpp"
#include "model_io.hpp"
#include "montecarlo.hpp"
#include "numeric.hpp"
#include "poly.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
