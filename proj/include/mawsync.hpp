#pragma once

#include "mawsync/attacks.hpp"
#include "mawsync/bench.hpp"
#include "mawsync/butterworth.hpp"
#include "mawsync/core_signal.hpp"
#include "mawsync/corpus.hpp"
#include "mawsync/detector.hpp"
#include "mawsync/embedder.hpp"
#include "mawsync/metrics.hpp"
#include "mawsync/params.hpp"
#include "mawsync/resampler.hpp"
#include "mawsync/sync_codes.hpp"
#include "mawsync/wav.hpp"
