#pragma once

#include "model.hpp"
#include "ode.hpp"
#include "flow.hpp"
#include "classify.hpp"
#include "jacobi.hpp"
#include "shooting.hpp"
#include "homotopy.hpp"
#include "synthesis.hpp"
#include "io.hpp"
