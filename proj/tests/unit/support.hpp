#pragma once

#include "svcvirt/error.hpp"

#include <doctest.h>

#include <random>
#include <string>

// Runs `expr` and checks it throws svcvirt::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                                      \
    do {                                                                      \
        bool thrown_ = false;                                                 \
        try {                                                                 \
            (void)(expr);                                                     \
        } catch (const svcvirt::Error& e_) {                                  \
            thrown_ = true;                                                   \
            CHECK_MESSAGE(e_.code() == (expected), e_.what());                \
        }                                                                     \
        CHECK_MESSAGE(thrown_, "expected " << svcvirt::to_string(expected));  \
    } while (false)

namespace testing {

inline std::string random_ident(std::mt19937& rng, std::size_t min_len = 1, std::size_t max_len = 10)
{
    static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
    std::string s;
    std::size_t n = len(rng);
    // Leading letter keeps generated names away from digit-only edge cases.
    s += kAlphabet[pick(rng) % 52];
    while (s.size() < n)
        s += kAlphabet[pick(rng)];
    return s;
}

} // namespace testing
