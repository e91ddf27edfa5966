#pragma once

#include "prion/errors.hpp"
#include "prion/quadrature.hpp"
#include "prion/report.hpp"
#include "prion/kernels.hpp"
#include "prion/hypothesis.hpp"
#include "prion/grid.hpp"
#include "prion/discretization.hpp"
#include "prion/initial_data.hpp"
#include "prion/integrator.hpp"
#include "prion/oracle.hpp"
#include "prion/diagnostics.hpp"
#include "prion/config.hpp"
#include "prion/io.hpp"
#include "prion/studies.hpp"
#include "prion/app.hpp"
