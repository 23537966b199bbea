#include "aoii/transitions.hpp"

#include <sstream>
#include <stdexcept>

namespace aoii {

std::string to_string(const State& s) {
  std::ostringstream os;
  os << "(" << s.delta << "," << s.t << "," << s.i << ")";
  return os.str();
}

TransitionList transitions(const SourceModel& source, const DelayModel& delay,
                           const State& s, Action a) {
  if (!is_valid_state(s))
    throw std::invalid_argument("transitions: invalid state " + to_string(s));

  const double p = source.flip_prob();
  TransitionList out;

  if (a == Action::transmit) {
    // A fresh transmission replaces any in-flight update; only q_1 matters.
    const double q1 = delay.hazard(1);
    if (s.delta == 0) {
      out.push({0, 0, -1}, q1 * (1 - p));
      out.push({1, 0, -1}, q1 * p);
      out.push({0, 1, 0}, (1 - q1) * (1 - p));
      out.push({1, 1, 0}, (1 - q1) * p);
    } else {
      out.push({0, 0, -1}, q1 * (1 - p));
      out.push({s.delta + 1, 0, -1}, q1 * p);
      out.push({0, 1, 1}, (1 - q1) * p);
      out.push({s.delta + 1, 1, 1}, (1 - q1) * (1 - p));
    }
    return out;
  }

  if (s.i == -1) {
    // Idle channel, stay idle: only the source moves.
    if (s.delta == 0) {
      out.push({0, 0, -1}, 1 - p);
      out.push({1, 0, -1}, p);
    } else {
      out.push({s.delta + 1, 0, -1}, 1 - p);
      out.push({0, 0, -1}, p);
    }
    return out;
  }

  // Continuing transmission: delivery by q_{t+1}.  A delivered i = 1 update
  // flips the estimate, a delivered i = 0 update leaves it unchanged.
  const double q = delay.hazard(s.t + 1);
  if (s.delta == 0) {
    if (s.i == 0) {
      out.push({0, 0, -1}, q * (1 - p));
      out.push({1, 0, -1}, q * p);
      out.push({0, s.t + 1, 0}, (1 - q) * (1 - p));
      out.push({1, s.t + 1, 0}, (1 - q) * p);
    } else {
      out.push({0, 0, -1}, q * p);
      out.push({1, 0, -1}, q * (1 - p));
      out.push({0, s.t + 1, 1}, (1 - q) * (1 - p));
      out.push({1, s.t + 1, 1}, (1 - q) * p);
    }
  } else {
    if (s.i == 0) {
      out.push({0, 0, -1}, q * p);
      out.push({s.delta + 1, 0, -1}, q * (1 - p));
      out.push({0, s.t + 1, 0}, (1 - q) * p);
      out.push({s.delta + 1, s.t + 1, 0}, (1 - q) * (1 - p));
    } else {
      out.push({0, 0, -1}, q * (1 - p));
      out.push({s.delta + 1, 0, -1}, q * p);
      out.push({0, s.t + 1, 1}, (1 - q) * p);
      out.push({s.delta + 1, s.t + 1, 1}, (1 - q) * (1 - p));
    }
  }
  return out;
}

}  // namespace aoii
