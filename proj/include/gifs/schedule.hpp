#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gifs {

/// Positive sequence s_1, s_2, ... used for the beta / sigma tolerances of
/// the outer iteration. Text forms: "1/k", "c/k", "geometric:r",
/// "geometric:r:c" (c * r^k) and "const:c".
class Schedule {
 public:
  enum class Kind { harmonic, geometric, constant };

  static Schedule harmonic(double scale = 1.0) { return Schedule(Kind::harmonic, scale, 0.0); }
  static Schedule geometric(double ratio, double scale = 1.0) { return Schedule(Kind::geometric, scale, ratio); }
  static Schedule constant(double value) { return Schedule(Kind::constant, value, 0.0); }

  static Schedule parse(std::string_view text) {
    auto number = [&](std::string_view s) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("bad schedule number '" + std::string(s) + "' in '" + std::string(text) + "'");
      return v;
    };
    if (text.size() >= 2 && text.substr(text.size() - 2) == "/k")
      return harmonic(number(text.substr(0, text.size() - 2)));
    if (text.rfind("geometric:", 0) == 0) {
      const auto rest = text.substr(10);
      const auto colon = rest.find(':');
      if (colon == std::string_view::npos) return geometric(number(rest));
      return geometric(number(rest.substr(0, colon)), number(rest.substr(colon + 1)));
    }
    if (text.rfind("const:", 0) == 0) return constant(number(text.substr(6)));
    throw std::invalid_argument("unknown schedule '" + std::string(text) + "' (expected 1/k, geometric:r or const:c)");
  }

  double operator()(std::size_t k) const {
    if (k == 0) throw std::invalid_argument("schedules are indexed from 1");
    const double kk = static_cast<double>(k);
    switch (kind_) {
      case Kind::harmonic: return scale_ / kk;
      case Kind::geometric: return scale_ * std::pow(ratio_, kk);
      case Kind::constant: return scale_;
    }
    return scale_;
  }

  Kind kind() const noexcept { return kind_; }

  std::string str() const {
    auto fmt = [](double v) {
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, r.ptr);
    };
    switch (kind_) {
      case Kind::harmonic: return scale_ == 1.0 ? "1/k" : fmt(scale_) + "/k";
      case Kind::geometric: return "geometric:" + fmt(ratio_) + (scale_ == 1.0 ? "" : ":" + fmt(scale_));
      case Kind::constant: return "const:" + fmt(scale_);
    }
    return {};
  }

 private:
  Schedule(Kind kind, double scale, double ratio) : kind_(kind), scale_(scale), ratio_(ratio) {
    if (!(scale > 0.0)) throw std::invalid_argument("schedule scale must be positive");
    if (kind == Kind::geometric && !(ratio > 0.0 && ratio < 1.0))
      throw std::invalid_argument("geometric schedule ratio must lie in (0, 1)");
  }

  Kind kind_;
  double scale_;
  double ratio_;
};

struct Schedules {
  Schedule beta = Schedule::harmonic();
  Schedule sigma = Schedule::harmonic();
};

}  // namespace gifs
