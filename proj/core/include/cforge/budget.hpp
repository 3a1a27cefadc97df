#pragma once

#include <stdexcept>

namespace cforge {

// Caps for windowed enumeration; exceeding one is an error, never a silent
// truncation.
struct Budget {
  long long max_elements = 5'000'000;
  long long max_pairs = 200'000'000;
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void charge_elements(const Budget& b, long long n, const char* what) {
  if (n > b.max_elements)
    throw BudgetExceeded(std::string(what) + ": element budget exceeded (" + std::to_string(n) +
                         " > " + std::to_string(b.max_elements) + ")");
}

inline void charge_pairs(const Budget& b, long long n, const char* what) {
  if (n > b.max_pairs)
    throw BudgetExceeded(std::string(what) + ": pair budget exceeded (" + std::to_string(n) +
                         " > " + std::to_string(b.max_pairs) + ")");
}

}  // namespace cforge
