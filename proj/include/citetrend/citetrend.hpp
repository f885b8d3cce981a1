#pragma once

#include "citetrend/affiliations.hpp"
#include "citetrend/arxiv.hpp"
#include "citetrend/citations.hpp"
#include "citetrend/config.hpp"
#include "citetrend/corpus.hpp"
#include "citetrend/correlation.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/http.hpp"
#include "citetrend/report.hpp"
#include "citetrend/savitzky_golay.hpp"
#include "citetrend/stats.hpp"
#include "citetrend/text.hpp"
#include "citetrend/time.hpp"
#include "citetrend/trends.hpp"
#include "citetrend/version.hpp"
#include "citetrend/zscore.hpp"
