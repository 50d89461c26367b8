#pragma once

#include "vigil/common.hpp"
#include "vigil/config.hpp"
#include "vigil/features.hpp"
#include "vigil/filter.hpp"
#include "vigil/metrics.hpp"
#include "vigil/model_io.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/protocol.hpp"
#include "vigil/report.hpp"
#include "vigil/rng.hpp"
#include "vigil/session_io.hpp"
#include "vigil/signal.hpp"
#include "vigil/svm.hpp"
#include "vigil/synth.hpp"
