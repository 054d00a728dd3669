#ifndef SGD_SGD_HPP
#define SGD_SGD_HPP

// Smart gateway diversity emulation toolkit.

#include "sgd/config.hpp"
#include "sgd/csv_io.hpp"
#include "sgd/engine.hpp"
#include "sgd/error.hpp"
#include "sgd/pipeline.hpp"
#include "sgd/propstats.hpp"
#include "sgd/random.hpp"
#include "sgd/report.hpp"
#include "sgd/scenario.hpp"
#include "sgd/synth.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#endif
