#pragma once

#include "snowheat/carpet.hpp"
#include "snowheat/dimension.hpp"
#include "snowheat/error.hpp"
#include "snowheat/gbp.hpp"
#include "snowheat/generator.hpp"
#include "snowheat/geometry.hpp"
#include "snowheat/heat.hpp"
#include "snowheat/parallel.hpp"
#include "snowheat/raster.hpp"
#include "snowheat/rng.hpp"
#include "snowheat/selfsim.hpp"
#include "snowheat/serialize.hpp"
#include "snowheat/simplicity.hpp"
#include "snowheat/tubular.hpp"
