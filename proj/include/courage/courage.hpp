#pragma once

#include "courage/augmentation/mixup.hpp"
#include "courage/data/cache.hpp"
#include "courage/data/jhu.hpp"
#include "courage/data/mobility.hpp"
#include "courage/data/split.hpp"
#include "courage/data/standardizer.hpp"
#include "courage/data/windows.hpp"
#include "courage/forecast/baselines.hpp"
#include "courage/forecast/csv_io.hpp"
#include "courage/forecast/metrics.hpp"
#include "courage/forecast/predict.hpp"
#include "courage/model/transformer.hpp"
#include "courage/numerics/gradient_check.hpp"
#include "courage/training/checkpoint.hpp"
#include "courage/training/trainer.hpp"
