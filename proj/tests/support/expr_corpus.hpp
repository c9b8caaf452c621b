#pragma once

#include <array>
#include <string_view>

namespace corpus {

// Well-formed expressions over t, x, dx, T, xT, phiT. Every argument of
// log, sqrt and abs stays away from its singular point when all variables
// lie in [0.5, 2].
inline constexpr std::array<std::string_view, 50> kValid = {
    "t^2 - 1 + dx^2",
    "dx^2 + phiT^2",
    "exp(-t)*(dx^2 + (x-1)^2)",
    "x",
    "sin(x)*dx",
    "t^3 - 6*t^2 + 11*t - 6 + dx^2",
    "x^2 + dx^2",
    "sqrt(1 + dx^2)",
    "log(x + t)",
    "exp(x*dx)",
    "cos(t)*x - sin(t)*dx",
    "x/dx",
    "(x - t)/(1 + dx^2)",
    "abs(x - 3)*dx",
    "x^dx",
    "t^x",
    "2^x",
    "-x^2",
    "-(x + dx)^3",
    "x^-2 + dx^-1",
    "x^0.5*dx^1.5",
    "sin(cos(x*t))",
    "exp(sin(dx))*log(1 + x^2)",
    "sqrt(x*x + dx*dx + 1)",
    "1/(x + dx + t)",
    "x*dx*t*T",
    "T^2 + xT^2",
    "xT*exp(-T)",
    "(xT - 1)^2 + T",
    "phiT*dx - x*phiT^2",
    "3*x - 2*dx + 7",
    "x - dx - t - 1",
    "x/2/dx",
    "2^3^x",
    "(t + 1)^1.5",
    "log(sqrt(x))",
    "exp(log(x) * dx)",
    "sin(x)^2 + cos(x)^2",
    "abs(dx - 4) + abs(x + 1)",
    "x^3/(1 + t^2)",
    "cos(dx)^3 - sin(x*dx)",
    "1.5e-1*x^2 + 2.5E0*dx",
    "((x))",
    "-(-(x*dx))",
    "t*sin(t) + x*cos(t)",
    "exp(-(x - 1)^2/(2*dx^2))",
    "log(x)/log(2 + dx)",
    "sqrt(abs(x - 5))",
    "x^(1 + dx)",
    "(x + dx)^(t/2)",
};

struct Malformed {
  std::string_view source;
  std::size_t offset;  // where the error must be reported
};

inline constexpr std::array<Malformed, 20> kMalformed = {{
    {"sin(", 4},
    {"dx^^2", 3},
    {"1 +", 3},
    {"(t", 2},
    {"t)", 1},
    {"foo(x)", 0},
    {"2x", 1},
    {"x y", 2},
    {"", 0},
    {"*x", 0},
    {"t +* x", 3},
    {"sin x", 4},
    {"sin()", 4},
    {"exp(1,2)", 5},
    {"1..2", 2},
    {"3e", 2},
    {"phi", 0},
    {"T^", 2},
    {"@", 0},
    {"log(x))", 6},
}};

}  // namespace corpus
