#pragma once

#include "roadmind/agent.hpp"
#include "roadmind/backends.hpp"
#include "roadmind/config.hpp"
#include "roadmind/congestion.hpp"
#include "roadmind/llm_backend.hpp"
#include "roadmind/map_io.hpp"
#include "roadmind/network.hpp"
#include "roadmind/planner.hpp"
#include "roadmind/report.hpp"
#include "roadmind/request_manager.hpp"
#include "roadmind/simulation.hpp"
