#pragma once

#include "gbmcheck/error.hpp"
#include "gbmcheck/evaluate.hpp"
#include "gbmcheck/gbm.hpp"
#include "gbmcheck/ingest.hpp"
#include "gbmcheck/pipeline.hpp"
#include "gbmcheck/random.hpp"
#include "gbmcheck/specfun.hpp"
#include "gbmcheck/stattests.hpp"
