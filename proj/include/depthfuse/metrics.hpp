#pragma once

#include "depthfuse/metrics/gradient.hpp"
#include "depthfuse/metrics/information.hpp"
#include "depthfuse/metrics/perceptual.hpp"
#include "depthfuse/metrics/phase.hpp"
#include "depthfuse/metrics/report.hpp"
#include "depthfuse/metrics/structural.hpp"
