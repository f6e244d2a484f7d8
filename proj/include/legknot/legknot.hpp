#pragma once

#include "config.hpp"
#include "diagram.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "fixtures.hpp"
#include "geometry.hpp"
#include "io.hpp"
#include "knot.hpp"
#include "legendrify.hpp"
#include "parallel.hpp"
#include "planar.hpp"
#include "tangency.hpp"
#include "trigpoly.hpp"
