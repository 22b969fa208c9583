#pragma once

#include "parabolic/errors.hpp"
#include "parabolic/point.hpp"
#include "parabolic/metric.hpp"
#include "parabolic/sampling.hpp"
#include "parabolic/lip_analysis.hpp"
#include "parabolic/implicit_solver.hpp"
#include "parabolic/starlike_domain.hpp"
#include "parabolic/chart_atlas.hpp"
#include "parabolic/radial_dsl.hpp"
#include "parabolic/suites.hpp"
#include "parabolic/config.hpp"
#include "parabolic/report.hpp"
