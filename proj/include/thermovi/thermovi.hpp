#pragma once

#include "thermovi/errors.hpp"
#include "thermovi/models.hpp"
#include "thermovi/trajectory.hpp"
#include "thermovi/continuous.hpp"
#include "thermovi/scheme.hpp"
#include "thermovi/integrators.hpp"
#include "thermovi/geometry.hpp"
#include "thermovi/config.hpp"
#include "thermovi/commands.hpp"
