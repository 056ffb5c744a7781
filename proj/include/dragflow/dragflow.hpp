// Umbrella header for the whole library.
#pragma once

#include "dragflow/config.hpp"
#include "dragflow/diagnostics.hpp"
#include "dragflow/driver.hpp"
#include "dragflow/errors.hpp"
#include "dragflow/field.hpp"
#include "dragflow/initial.hpp"
#include "dragflow/integrator.hpp"
#include "dragflow/kinetic.hpp"
#include "dragflow/model.hpp"
#include "dragflow/rng.hpp"
#include "dragflow/snapshot.hpp"
#include "dragflow/spectral.hpp"
