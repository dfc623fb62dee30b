#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vplap {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_range_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Compensated (Kahan) accumulator; additions must happen in a fixed order.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool nearly_equal(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail
}  // namespace vplap
