#pragma once

#include "hlm/arcs.hpp"
#include "hlm/arith.hpp"
#include "hlm/characters.hpp"
#include "hlm/config.hpp"
#include "hlm/counting.hpp"
#include "hlm/error.hpp"
#include "hlm/expsums.hpp"
#include "hlm/localdata.hpp"
#include "hlm/meanvalue.hpp"
#include "hlm/oscint.hpp"
#include "hlm/phase.hpp"
#include "hlm/pipeline.hpp"
#include "hlm/rng.hpp"
#include "hlm/sysmodel.hpp"
