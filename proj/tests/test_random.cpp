// Copyright 2026 The qdea Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <array>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "qdea/random.hpp"

using namespace qdea;

// Published Random123 known-answer vectors for philox4x32-10.
TEST(Philox, KnownAnswerVectors) {
  using C = std::array<std::uint32_t, 4>;
  using K = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32(C{~0u, ~0u, ~0u, ~0u}, K{~0u, ~0u}), (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(PhiloxStream, StreamIsTheCounterSequence) {
  PhiloxStream s(0x0123456789abcdefull, 42);
  const std::array<std::uint32_t, 2> key = {0x89abcdefu, 0x01234567u};
  for (std::uint32_t i = 0; i < 4; ++i) {
    const auto block = philox4x32({i, 0, 42, 0}, key);
    EXPECT_EQ(s(), (static_cast<std::uint64_t>(block[1]) << 32) | block[0]);
    EXPECT_EQ(s(), (static_cast<std::uint64_t>(block[3]) << 32) | block[2]);
  }
  EXPECT_EQ(s.draws(), 4u);
}

TEST(PhiloxStream, ReopeningReproducesAndStreamsDiffer) {
  PhiloxStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    seen.insert(x);
    seen.insert(c());
    seen.insert(d());
  }
  EXPECT_EQ(seen.size(), 300u);
}

TEST(PhiloxStream, UniformMomentsAndRange) {
  PhiloxStream s(99, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(PhiloxStream, ExponentialMean) {
  PhiloxStream s(5, 1);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += s.exponential(2.0);
  EXPECT_NEAR(sum / n, 0.5, 5 * 0.5 / std::sqrt(n));
}

TEST(DeriveSeed, DistinctChildren) {
  std::set<std::uint64_t> children;
  for (std::uint64_t i = 0; i < 10000; ++i) children.insert(derive_seed(1, i));
  EXPECT_EQ(children.size(), 10000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  static_assert(mix64(0) == 0xe220a8397b1dcdafull);
}
