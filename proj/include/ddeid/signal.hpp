#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddeid/model.hpp"

namespace ddeid {

enum class SignalKind { Constant, SquarePulse, Table };

inline const char* to_string(SignalKind k) {
  switch (k) {
    case SignalKind::Constant: return "constant";
    case SignalKind::SquarePulse: return "square-pulse";
    case SignalKind::Table: return "table";
  }
  return "";
}

/// One channel of a piecewise-constant signal. levels[i] holds on
/// [switches[i-1], switches[i]) with switches[-1] = 0; `history` is the value
/// for t < 0.
struct Channel {
  std::vector<double> switches;  // strictly increasing, all > 0
  std::vector<double> levels;    // switches.size() + 1
  double history = 0.0;
};

struct Snap {
  int channel = 0;
  double original = 0.0;
  double snapped = 0.0;
};

/// Which one-sided value to take at a switch time.
enum class Side { Right, Left };

/// Piecewise-constant multi-channel input, right-continuous at switches.
class InputSignal {
 public:
  InputSignal() = default;
  InputSignal(SignalKind kind, std::vector<Channel> channels)
      : kind_(kind), channels_(std::move(channels)) {
    for (const auto& c : channels_) {
      if (c.levels.size() != c.switches.size() + 1)
        throw std::invalid_argument("InputSignal: levels/switches mismatch");
      for (std::size_t i = 0; i < c.switches.size(); ++i) {
        if (!(c.switches[i] > 0.0) ||
            (i > 0 && !(c.switches[i] > c.switches[i - 1])))
          throw std::invalid_argument(
              "InputSignal: switch times must be positive and increasing");
      }
    }
  }

  static InputSignal constant(const Vector& value, const Vector& history) {
    std::vector<Channel> ch;
    for (Eigen::Index i = 0; i < value.size(); ++i)
      ch.push_back({{}, {value[i]}, history[i]});
    return InputSignal(SignalKind::Constant, std::move(ch));
  }
  static InputSignal constant(const Vector& value) {
    return constant(value, value);
  }

  SignalKind kind() const { return kind_; }
  int channels() const { return static_cast<int>(channels_.size()); }
  const std::vector<Channel>& channel_data() const { return channels_; }
  const std::vector<Snap>& snaps() const { return snaps_; }

  double value(int c, double t, Side side = Side::Right) const {
    const Channel& ch = channels_[static_cast<std::size_t>(c)];
    if (t < 0.0 || (t == 0.0 && side == Side::Left)) return ch.history;
    auto it = side == Side::Right
                  ? std::upper_bound(ch.switches.begin(), ch.switches.end(), t)
                  : std::lower_bound(ch.switches.begin(), ch.switches.end(), t);
    return ch.levels[static_cast<std::size_t>(it - ch.switches.begin())];
  }

  Vector value(double t, Side side = Side::Right) const {
    Vector out(channels());
    for (int c = 0; c < channels(); ++c) out[c] = value(c, t, side);
    return out;
  }

  /// offset + scale * signal, applied to levels and history alike.
  InputSignal affine(const Vector& offset, double scale) const {
    InputSignal out = *this;
    for (int c = 0; c < channels(); ++c) {
      Channel& ch = out.channels_[static_cast<std::size_t>(c)];
      for (double& v : ch.levels) v = offset[c] + scale * v;
      ch.history = offset[c] + scale * ch.history;
    }
    return out;
  }

  /// Pointwise sum of two signals with the same channel count.
  InputSignal plus(const InputSignal& other) const {
    if (other.channels() != channels())
      throw std::invalid_argument("InputSignal::plus: channel mismatch");
    std::vector<Channel> ch(channels_.size());
    for (int c = 0; c < channels(); ++c) {
      const Channel& a = channels_[static_cast<std::size_t>(c)];
      const Channel& b = other.channels_[static_cast<std::size_t>(c)];
      Channel& o = ch[static_cast<std::size_t>(c)];
      std::merge(a.switches.begin(), a.switches.end(), b.switches.begin(),
                 b.switches.end(), std::back_inserter(o.switches));
      o.switches.erase(std::unique(o.switches.begin(), o.switches.end()),
                       o.switches.end());
      o.levels.push_back(value(c, 0.0) + other.value(c, 0.0));
      for (double s : o.switches)
        o.levels.push_back(value(c, s) + other.value(c, s));
      o.history = a.history + b.history;
    }
    return InputSignal(SignalKind::Table, std::move(ch));
  }

  /// Copy whose switch times are rounded to the nearest multiple of h.
  /// Switches landing on 0 or on an earlier switch are merged (the later
  /// level wins). Every moved switch is recorded in snaps().
  InputSignal snapped(double h) const {
    InputSignal out;
    out.kind_ = kind_;
    out.snaps_ = snaps_;
    for (int c = 0; c < channels(); ++c) {
      const Channel& ch = channels_[static_cast<std::size_t>(c)];
      Channel o;
      o.history = ch.history;
      o.levels.push_back(ch.levels[0]);
      for (std::size_t i = 0; i < ch.switches.size(); ++i) {
        double s = std::round(ch.switches[i] / h) * h;
        if (s != ch.switches[i]) out.snaps_.push_back({c, ch.switches[i], s});
        double level = ch.levels[i + 1];
        if (s <= 0.0) {
          o.levels.back() = level;
        } else if (!o.switches.empty() && s <= o.switches.back()) {
          o.levels.back() = level;
        } else {
          o.switches.push_back(s);
          o.levels.push_back(level);
        }
      }
      out.channels_.push_back(std::move(o));
    }
    return out;
  }

  /// L2(0, T) norm over all channels, exact for piecewise-constant signals.
  double l2_norm(double T) const {
    double sum = 0.0;
    for (const Channel& ch : channels_) {
      double start = 0.0;
      for (std::size_t i = 0; i <= ch.switches.size(); ++i) {
        double stop = i < ch.switches.size() ? std::min(ch.switches[i], T) : T;
        if (stop > start) sum += ch.levels[i] * ch.levels[i] * (stop - start);
        start = std::max(start, stop);
        if (start >= T) break;
      }
    }
    return std::sqrt(sum);
  }

  /// All switch times of all channels, sorted, duplicates removed.
  std::vector<double> all_switches() const {
    std::vector<double> out;
    for (const auto& ch : channels_)
      out.insert(out.end(), ch.switches.begin(), ch.switches.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  SignalKind kind_ = SignalKind::Constant;
  std::vector<Channel> channels_;
  std::vector<Snap> snaps_;
};

inline int nth_prime(int i) {
  int count = -1;
  for (int c = 2;; ++c) {
    bool prime = true;
    for (int d = 2; d * d <= c; ++d)
      if (c % d == 0) {
        prime = false;
        break;
      }
    if (prime && ++count == i) return c;
  }
}

/// Pulse train per channel switching at multiples of sqrt(prime_c) inside
/// (0, T), so switch times of different channels are incommensurable. Levels
/// alternate +amplitude, -amplitude, ... starting at +amplitude on [0, first
/// switch). Zero before t = 0.
inline InputSignal make_square_pulse(int k, double T, double amplitude) {
  if (!(T > 0.0)) throw std::invalid_argument("make_square_pulse: T must be > 0");
  std::vector<Channel> ch;
  for (int c = 0; c < k; ++c) {
    Channel o;
    o.history = 0.0;
    if (amplitude == 0.0) {
      o.levels.push_back(0.0);
      ch.push_back(o);
      continue;
    }
    double period = std::sqrt(static_cast<double>(nth_prime(c)));
    double level = amplitude;
    o.levels.push_back(level);
    for (int m = 1; m * period < T; ++m) {
      level = -level;
      o.switches.push_back(m * period);
      o.levels.push_back(level);
    }
    ch.push_back(o);
  }
  return InputSignal(amplitude == 0.0 ? SignalKind::Constant
                                      : SignalKind::SquarePulse,
                     std::move(ch));
}

}  // namespace ddeid
