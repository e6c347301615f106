#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace fpp {

using Vec = std::vector<double>;
using Rational = boost::rational<long long>;

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedCase : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The p-norm on R^d. p = +inf is stored as std::numeric_limits<double>::infinity().
class NormSpec {
public:
    enum class Kind { one, two, inf, general };

    NormSpec(int d, double p);

    int d() const { return d_; }
    double p() const { return p_; }
    Kind kind() const { return kind_; }
    bool is_inf() const { return kind_ == Kind::inf; }

    // p as an exact rational; throws for p = inf.
    Rational p_rational() const;

    double operator()(const double* x) const;
    double operator()(const Vec& x) const;
    // N(b - a) without a temporary.
    double dist(const double* a, const double* b) const;

    // Euclidean radii with B_2(alpha) inside B_N(1) inside B_2(beta).
    double alpha() const;
    double beta() const;

    std::string p_string() const;

private:
    int d_;
    double p_;
    Kind kind_;
};

double norm_eval(const NormSpec& spec, const Vec& x);

// Parses "inf", "infinity" or a number >= 1.
double parse_p(const std::string& s);

// Continued-fraction conversion of x to a rational with denominator <= max_den.
Rational to_rational(double x, long long max_den = 1000000);

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

} // namespace fpp
