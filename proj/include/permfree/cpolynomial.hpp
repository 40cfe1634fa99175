#pragma once

#include <map>
#include <string>

#include "permfree/rational.hpp"

namespace permfree {

/// Polynomial in the aspect-ratio parameter c with big-integer coefficients.
/// Zero coefficients are never stored.
class CPolynomial {
public:
    CPolynomial() = default;

    /// Constant polynomial; implicit so the generic moment/cumulant templates
    /// can treat CPolynomial like a plain ring scalar.
    CPolynomial(long v) {
        if (v != 0) coeffs_[0] = v;
    }

    static CPolynomial constant(BigInt v) {
        CPolynomial p;
        p.set(0, std::move(v));
        return p;
    }

    /// coeff * c^exp.
    static CPolynomial term(unsigned exp, BigInt coeff = 1) {
        CPolynomial p;
        p.set(exp, std::move(coeff));
        return p;
    }

    bool is_zero() const { return coeffs_.empty(); }

    int degree() const { return coeffs_.empty() ? -1 : static_cast<int>(coeffs_.rbegin()->first); }

    BigInt coefficient(unsigned exp) const {
        auto it = coeffs_.find(exp);
        return it == coeffs_.end() ? BigInt(0) : it->second;
    }

    const std::map<unsigned, BigInt>& coefficients() const { return coeffs_; }

    CPolynomial& operator+=(const CPolynomial& other) {
        for (const auto& [e, v] : other.coeffs_) add(e, v);
        return *this;
    }

    friend CPolynomial operator+(CPolynomial a, const CPolynomial& b) { return a += b; }

    friend CPolynomial operator*(const CPolynomial& a, const CPolynomial& b) {
        CPolynomial out;
        for (const auto& [ea, va] : a.coeffs_)
            for (const auto& [eb, vb] : b.coeffs_) out.add(ea + eb, va * vb);
        return out;
    }

    CPolynomial& operator*=(const CPolynomial& other) { return *this = *this * other; }

    friend CPolynomial operator-(CPolynomial a, const CPolynomial& b) {
        for (const auto& [e, v] : b.coeffs_) a.add(e, -v);
        return a;
    }

    Rational evaluate(const Rational& c) const {
        Rational acc = 0;
        for (const auto& [e, v] : coeffs_) acc += Rational(v) * rat_pow(c, e);
        return acc;
    }

    double evaluate(double c) const {
        double acc = 0;
        for (const auto& [e, v] : coeffs_) acc += v.template convert_to<double>() * std::pow(c, e);
        return acc;
    }

    /// "c^3 + 3*c^2 + c", highest power first; "0" for the zero polynomial.
    std::string to_string() const {
        if (coeffs_.empty()) return "0";
        std::string out;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            const auto& [e, v] = *it;
            BigInt mag = v < 0 ? BigInt(-v) : v;
            if (out.empty()) {
                if (v < 0) out += "-";
            } else {
                out += v < 0 ? " - " : " + ";
            }
            const bool unit = mag == 1;
            if (e == 0) {
                out += mag.str();
            } else {
                if (!unit) out += mag.str() + "*";
                out += e == 1 ? "c" : "c^" + std::to_string(e);
            }
        }
        return out;
    }

    friend bool operator==(const CPolynomial&, const CPolynomial&) = default;

private:
    void set(unsigned exp, BigInt v) {
        if (v != 0) coeffs_[exp] = std::move(v);
    }
    void add(unsigned exp, const BigInt& v) {
        auto [it, inserted] = coeffs_.try_emplace(exp, v);
        if (!inserted) {
            it->second += v;
            if (it->second == 0) coeffs_.erase(it);
        }
    }

    std::map<unsigned, BigInt> coeffs_;
};

/// (1 + c)^k as a polynomial.
inline CPolynomial one_plus_c_pow(unsigned k) {
    CPolynomial base = CPolynomial::constant(1) + CPolynomial::term(1);
    CPolynomial acc = CPolynomial::constant(1);
    for (unsigned i = 0; i < k; ++i) acc *= base;
    return acc;
}

/// A limit moment as a rational function num(c) / (1+c)^den_pow. Square-model
/// values have den_pow = 0 (plain polynomials, e.g. free Poisson moments);
/// the rectangular model contributes genuine (1+c) denominators.
struct LimitValue {
    CPolynomial num;
    unsigned den_pow = 0;

    static LimitValue zero() { return {}; }
    static LimitValue constant(long v) { return {CPolynomial::constant(v), 0}; }

    bool is_zero() const { return num.is_zero(); }

    Rational evaluate(const Rational& c) const {
        return num.evaluate(c) / rat_pow(Rational(1) + c, den_pow);
    }

    double evaluate(double c) const { return num.evaluate(c) / std::pow(1.0 + c, den_pow); }

    LimitValue& operator+=(const LimitValue& other) {
        const unsigned p = std::max(den_pow, other.den_pow);
        num = num * one_plus_c_pow(p - den_pow) + other.num * one_plus_c_pow(p - other.den_pow);
        den_pow = p;
        return *this;
    }

    friend LimitValue operator*(const LimitValue& a, const LimitValue& b) {
        return {a.num * b.num, a.den_pow + b.den_pow};
    }

    /// Equality as rational functions (cross-multiplied).
    bool equals(const LimitValue& other) const {
        return num * one_plus_c_pow(other.den_pow) == other.num * one_plus_c_pow(den_pow);
    }

    std::string to_string() const {
        if (num.is_zero()) return "0";
        if (den_pow == 0) return num.to_string();
        return "(" + num.to_string() + ") / (1+c)^" + std::to_string(den_pow);
    }
};

}  // namespace permfree
