#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace ccc
{
    using NodeId = std::uint32_t;
    inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

    // Virtual time in integer ticks. One model time unit is kTicksPerUnit ticks,
    // so D = 1 means a maximum delay of one million ticks.
    using Time = std::int64_t;
    inline constexpr Time kTicksPerUnit = 1'000'000;

    using Rational = boost::multiprecision::cpp_rational;

    inline Time to_ticks(double units)
    {
        return static_cast<Time>(units * static_cast<double>(kTicksPerUnit) + (units >= 0 ? 0.5 : -0.5));
    }

    inline double to_units(Time ticks) { return static_cast<double>(ticks) / static_cast<double>(kTicksPerUnit); }

    /// Parses a plain decimal literal ("0.79", "-1.5e-2", "3") into an exact rational.
    inline Rational parse_decimal(std::string_view text)
    {
        if (text.empty())
        {
            throw std::invalid_argument("empty decimal literal");
        }
        std::size_t i = 0;
        bool negative = false;
        if (text[i] == '+' || text[i] == '-')
        {
            negative = text[i] == '-';
            ++i;
        }
        boost::multiprecision::cpp_int mantissa = 0;
        long exponent = 0;
        bool any_digit = false;
        bool seen_point = false;
        for (; i < text.size(); ++i)
        {
            const char c = text[i];
            if (c >= '0' && c <= '9')
            {
                mantissa = mantissa * 10 + (c - '0');
                any_digit = true;
                if (seen_point)
                {
                    --exponent;
                }
            }
            else if (c == '.' && !seen_point)
            {
                seen_point = true;
            }
            else if (c == 'e' || c == 'E')
            {
                long e = 0;
                auto tail = text.substr(i + 1);
                if (!tail.empty() && tail.front() == '+')
                {
                    tail.remove_prefix(1);
                }
                auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), e);
                if (ec != std::errc{} || ptr != tail.data() + tail.size())
                {
                    throw std::invalid_argument("bad exponent in decimal literal: " + std::string(text));
                }
                exponent += e;
                break;
            }
            else
            {
                throw std::invalid_argument("bad decimal literal: " + std::string(text));
            }
        }
        if (!any_digit)
        {
            throw std::invalid_argument("bad decimal literal: " + std::string(text));
        }
        Rational value(mantissa);
        boost::multiprecision::cpp_int scale = 1;
        for (long k = 0; k < (exponent < 0 ? -exponent : exponent); ++k)
        {
            scale *= 10;
        }
        value = exponent < 0 ? value / Rational(scale) : value * Rational(scale);
        return negative ? Rational(-value) : value;
    }

    /// Exact rational for a double, using its shortest round-trip decimal form,
    /// so a JSON 0.79 becomes exactly 79/100.
    inline Rational rational_from_double(double v)
    {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        if (ec != std::errc{})
        {
            throw std::invalid_argument("cannot format double");
        }
        return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
    }

    inline double to_double(const Rational &r) { return r.convert_to<double>(); }

    inline std::string to_decimal_string(const Rational &r)
    {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, to_double(r));
        return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
    }

    /// Small exact fraction used on the protocol hot path (thresholds like beta * |Members|).
    struct Ratio
    {
        std::int64_t num = 0;
        std::int64_t den = 1;

        static Ratio from(const Rational &r)
        {
            const auto n = boost::multiprecision::numerator(r);
            const auto d = boost::multiprecision::denominator(r);
            if (n > std::numeric_limits<std::int64_t>::max() / 1024 || d > std::numeric_limits<std::int64_t>::max() / 1024)
            {
                throw std::invalid_argument("protocol fraction too fine-grained");
            }
            return Ratio{n.convert_to<std::int64_t>(), d.convert_to<std::int64_t>()};
        }

        Ratio times(std::int64_t k) const { return Ratio{num * k, den}; }
        bool is_zero() const { return num == 0; }
        bool positive() const { return num > 0; }
        /// count >= *this, exactly.
        bool reached_by(std::int64_t count) const { return count * den >= num; }
        double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }
        friend bool operator==(const Ratio &a, const Ratio &b) { return a.num * b.den == b.num * a.den; }
    };

    /// Seeded generator. Only raw engine output is used so that sequences do not
    /// depend on the standard library's distribution implementations.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : m_engine(seed) {}

        std::uint64_t next() { return m_engine(); }

        /// Uniform integer in [lo, hi].
        std::int64_t uniform(std::int64_t lo, std::int64_t hi)
        {
            if (hi <= lo)
            {
                return lo;
            }
            const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
            if (span == 0)
            {
                return static_cast<std::int64_t>(next());
            }
            const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
            std::uint64_t x;
            do
            {
                x = next();
            } while (x >= limit);
            return lo + static_cast<std::int64_t>(x % span);
        }

        bool chance(std::uint64_t numerator, std::uint64_t denominator)
        {
            return static_cast<std::uint64_t>(uniform(0, static_cast<std::int64_t>(denominator) - 1)) < numerator;
        }

        std::uint64_t fork() { return next() ^ 0x9e3779b97f4a7c15ULL; }

    private:
        std::mt19937_64 m_engine;
    };
}
