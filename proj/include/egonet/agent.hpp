#pragma once

#include <string>

#include "egonet/egoview.hpp"
#include "egonet/eventlog.hpp"

namespace egonet {

/// Scripted participants that answer every task perfectly. Their only purpose
/// is to drive the timing model and the logging pipeline end to end.
///   Jumper: ego conditions; clicks each FoP node and rides the 3 s jump.
///   Flyer:  baseline; clicks, turns toward the node and flies at full speed
///           until inside the arrival radius.
/// Every click or pointing action costs kSelectSeconds.
enum class AgentKind { Jumper, Flyer };

std::string to_string(AgentKind a);
AgentKind parse_agent(const std::string& name);

/// Jumpers need an ego condition and flyers the baseline; throws ParameterError otherwise.
void check_agent_condition(AgentKind agent, ViewCondition condition);

AgentKind agent_for(ViewCondition condition);

/// Plays a whole pass starting at start_time and returns the session time at
/// which the last task completed.
double drive_agent(PassRecorder& recorder, AgentKind agent, double start_time);

}  // namespace egonet
