#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hsc {

// A natural number or the undefined value (bottom).
class Value {
public:
  constexpr Value() = default;
  constexpr Value(uint64_t n) : v_(n) {}

  static constexpr Value bot() { return Value(); }

  constexpr bool is_bot() const { return !v_.has_value(); }
  constexpr bool is_nat() const { return v_.has_value(); }
  constexpr uint64_t nat() const { return *v_; }

  friend constexpr bool operator==(const Value&, const Value&) = default;

  // "end" for bottom, decimal otherwise.
  std::string str() const { return is_bot() ? "end" : std::to_string(*v_); }

private:
  std::optional<uint64_t> v_;
};

}  // namespace hsc
