#pragma once

#include "lorafmar/analytic/plr_model.hpp"
#include "lorafmar/core/cause.hpp"
#include "lorafmar/core/error.hpp"
#include "lorafmar/core/random.hpp"
#include "lorafmar/core/scheduler.hpp"
#include "lorafmar/core/time.hpp"
#include "lorafmar/device/end_device.hpp"
#include "lorafmar/gateway/gateway.hpp"
#include "lorafmar/metrics/report.hpp"
#include "lorafmar/metrics/stats.hpp"
#include "lorafmar/phy/capture.hpp"
#include "lorafmar/phy/channel_plan.hpp"
#include "lorafmar/phy/duty_cycle.hpp"
#include "lorafmar/phy/radio.hpp"
#include "lorafmar/phy/transmission.hpp"
#include "lorafmar/sensor/gas_sensor.hpp"
#include "lorafmar/server/network_server.hpp"
#include "lorafmar/sim/scenario.hpp"
#include "lorafmar/sim/scenario_io.hpp"
#include "lorafmar/sim/simulation.hpp"
#include "lorafmar/sim/validation.hpp"
