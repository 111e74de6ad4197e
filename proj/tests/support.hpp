#pragma once

#include <random>
#include <vector>

#include "orbit/model.hpp"

namespace orbit::test_support {

inline std::vector<double> random_distribution(std::mt19937_64& rng, int S, double zero_prob = 0.0) {
    std::exponential_distribution<double> ex(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(S);
    double sum = 0.0;
    for (double& x : p) {
        x = u(rng) < zero_prob ? 0.0 : ex(rng);
        sum += x;
    }
    if (sum == 0.0) {
        p[std::uniform_int_distribution<int>(0, S - 1)(rng)] = 1.0;
        return p;
    }
    for (double& x : p) x /= sum;
    return p;
}

inline std::vector<double> random_values(std::mt19937_64& rng, int S, double vmax) {
    std::uniform_real_distribution<double> u(0.0, vmax);
    std::vector<double> v(S);
    for (double& x : v) x = u(rng);
    return v;
}

inline TabularMDP random_mdp(std::mt19937_64& rng, int S, int A, int H, double zero_prob = 0.3) {
    TabularMDP m(S, A, H);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto p = random_distribution(rng, S, zero_prob);
                auto row = m.row(h, s, a);
                std::copy(p.begin(), p.end(), row.begin());
                m.reward(h, s, a) = u(rng);
            }
    return m;
}

inline Policy random_policy(std::mt19937_64& rng, int S, int A, int H) {
    Policy pi(S, H);
    std::uniform_int_distribution<int> u(0, A - 1);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) pi.at(h, s) = u(rng);
    return pi;
}

}  // namespace orbit::test_support
