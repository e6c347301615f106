#include "fpp/norm.hpp"

#include <algorithm>
#include <sstream>

namespace fpp {

NormSpec::NormSpec(int d, double p) : d_(d), p_(p) {
    if (d < 2)
        throw InvalidArgument("dimension must be >= 2, got " + std::to_string(d));
    if (!(p >= 1.0))
        throw InvalidArgument("p must be >= 1");
    if (std::isinf(p))
        kind_ = Kind::inf;
    else if (p == 1.0)
        kind_ = Kind::one;
    else if (p == 2.0)
        kind_ = Kind::two;
    else
        kind_ = Kind::general;
}

Rational NormSpec::p_rational() const {
    if (is_inf())
        throw InvalidArgument("p = inf has no rational value");
    return to_rational(p_);
}

double NormSpec::operator()(const double* x) const {
    switch (kind_) {
    case Kind::one: {
        double s = 0;
        for (int i = 0; i < d_; ++i) s += std::abs(x[i]);
        return s;
    }
    case Kind::two: {
        if (d_ == 2) return std::sqrt(x[0] * x[0] + x[1] * x[1]);
        double s = 0;
        for (int i = 0; i < d_; ++i) s += x[i] * x[i];
        return std::sqrt(s);
    }
    case Kind::inf: {
        double m = 0;
        for (int i = 0; i < d_; ++i) m = std::max(m, std::abs(x[i]));
        return m;
    }
    case Kind::general: {
        double m = 0;
        for (int i = 0; i < d_; ++i) m = std::max(m, std::abs(x[i]));
        if (m == 0) return 0;
        double s = 0;
        for (int i = 0; i < d_; ++i) s += std::pow(std::abs(x[i]) / m, p_);
        return m * std::pow(s, 1.0 / p_);
    }
    }
    return 0;
}

double NormSpec::operator()(const Vec& x) const {
    if (static_cast<int>(x.size()) != d_)
        throw InvalidArgument("vector length " + std::to_string(x.size()) +
                              " does not match dimension " + std::to_string(d_));
    return (*this)(x.data());
}

double NormSpec::dist(const double* a, const double* b) const {
    double t[16];
    if (d_ <= 16) {
        for (int i = 0; i < d_; ++i) t[i] = b[i] - a[i];
        return (*this)(t);
    }
    Vec v(d_);
    for (int i = 0; i < d_; ++i) v[i] = b[i] - a[i];
    return (*this)(v.data());
}

double NormSpec::alpha() const {
    if (kind_ == Kind::inf || p_ >= 2.0) return 1.0;
    return std::pow(double(d_), 0.5 - 1.0 / p_);
}

double NormSpec::beta() const {
    if (kind_ == Kind::inf) return std::sqrt(double(d_));
    if (p_ <= 2.0) return 1.0;
    return std::pow(double(d_), 0.5 - 1.0 / p_);
}

std::string NormSpec::p_string() const {
    if (is_inf()) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << p_;
    return os.str();
}

double norm_eval(const NormSpec& spec, const Vec& x) { return spec(x); }

double parse_p(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    size_t pos = 0;
    double v;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("cannot parse p from '" + s + "'");
    }
    if (pos != t.size()) throw InvalidArgument("cannot parse p from '" + s + "'");
    if (!(v >= 1.0)) throw InvalidArgument("p must be >= 1");
    return v;
}

Rational to_rational(double x, long long max_den) {
    if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
    // convergents h/k of the continued fraction of x
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        if (std::abs(a) > 9e15) break;
        long long ai = static_cast<long long>(a);
        long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double frac = r - a;
        if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= 1e-15 * std::max(1.0, std::abs(x)) ||
            frac < 1e-12)
            break;
        r = 1.0 / frac;
    }
    return Rational(h1, k1);
}

} // namespace fpp
