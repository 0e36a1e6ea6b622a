#pragma once

#include "bergman/harness/battery.hpp"
#include "bergman/harness/config.hpp"
#include "bergman/harness/report.hpp"
#include "bergman/harness/runner.hpp"
