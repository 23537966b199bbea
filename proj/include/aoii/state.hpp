#pragma once

#include <stdexcept>
#include <string>

namespace aoii {

// Joint process state.  `i` is the channel indicator: -1 idle, 0 when the
// in-flight update equals the receiver's current estimate, 1 when it differs.
// An idle channel carries no in-flight age, so i == -1 iff t == 0.
struct State {
  int delta = 0;  // consecutive slots the receiver's estimate has been wrong
  int t = 0;      // slots the in-flight update has been transmitting
  int i = -1;

  friend bool operator==(const State&, const State&) = default;
};

inline bool is_valid_state(const State& s) {
  if (s.delta < 0 || s.t < 0) return false;
  if (s.i != -1 && s.i != 0 && s.i != 1) return false;
  if (s.i == -1) return s.t == 0;
  return s.t >= 1;
}

std::string to_string(const State& s);

enum class Action : int { stay = 0, transmit = 1 };

inline int to_int(Action a) { return static_cast<int>(a); }

// Lexicographic (delta, t, i) enumeration of the valid states with
// delta <= delta_max and t <= t_max_trunc.  Invalid (t, i) pairings are not
// part of the enumeration, so each delta level holds 1 + 2 * t_max_trunc
// states.  The ordering is fixed so solver outputs are reproducible.
class StateIndexer {
 public:
  StateIndexer(int delta_max, int t_max_trunc)
      : delta_max_(delta_max), t_max_trunc_(t_max_trunc), row_(1 + 2 * t_max_trunc) {
    if (delta_max < 1 || t_max_trunc < 1)
      throw std::invalid_argument("StateIndexer: bounds must be positive");
  }

  int size() const { return (delta_max_ + 1) * row_; }
  int delta_max() const { return delta_max_; }
  int t_max_trunc() const { return t_max_trunc_; }

  bool contains(const State& s) const {
    return is_valid_state(s) && s.delta <= delta_max_ && s.t <= t_max_trunc_;
  }

  int index_of(const State& s) const {
    if (!contains(s)) throw std::out_of_range("StateIndexer: state " + to_string(s) + " out of range");
    int offset = s.t == 0 ? 0 : 2 * s.t - 1 + (s.i == 1 ? 1 : 0);
    return s.delta * row_ + offset;
  }

  State state_at(int idx) const {
    if (idx < 0 || idx >= size()) throw std::out_of_range("StateIndexer: index out of range");
    int delta = idx / row_;
    int r = idx % row_;
    if (r == 0) return {delta, 0, -1};
    return {delta, (r + 1) / 2, r % 2 == 0 ? 1 : 0};
  }

  friend bool operator==(const StateIndexer&, const StateIndexer&) = default;

 private:
  int delta_max_;
  int t_max_trunc_;
  int row_;
};

}  // namespace aoii
