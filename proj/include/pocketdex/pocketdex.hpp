#pragma once

#include "pocketdex/augment.hpp"
#include "pocketdex/encoder.hpp"
#include "pocketdex/errors.hpp"
#include "pocketdex/geometry.hpp"
#include "pocketdex/index.hpp"
#include "pocketdex/io.hpp"
#include "pocketdex/metrics.hpp"
#include "pocketdex/objective.hpp"
#include "pocketdex/structure.hpp"
#include "pocketdex/tape.hpp"
#include "pocketdex/tensor.hpp"
#include "pocketdex/trainer.hpp"
#include "pocketdex/vocab.hpp"
