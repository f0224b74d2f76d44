// SPDX-License-Identifier: Apache-2.0
#include <swirl/hash.hpp>

#include <gtest/gtest.h>

#include <string>

using swirl::xxh64;

// Vectors from the reference xxHash implementation.
TEST(Xxh64, ReferenceVectors)
{
    EXPECT_EQ(xxh64(""), 0xef46db3751d8e999ULL);
    EXPECT_EQ(xxh64("a"), 0xd24ec4f1a98c6e5bULL);
    EXPECT_EQ(xxh64("abc"), 0x44bc2cf5ad770999ULL);
    EXPECT_EQ(xxh64("The quick brown fox jumps over the lazy dog"), 0x0b242d361fda71bcULL);
    EXPECT_EQ(xxh64("abc", 1), 0xbea9ca8199328908ULL);
    EXPECT_EQ(xxh64("hello world", 42), 0x69c2b68f9d9352a1ULL);
}

TEST(Xxh64, LongInputCrossesStripeBoundaries)
{
    std::string bytes;
    for (int i = 0; i < 100; ++i)
        bytes.push_back(static_cast<char>(i));
    EXPECT_EQ(xxh64(bytes), 0x6ac1e58032166597ULL);
}

TEST(Hex, ZeroPadded)
{
    EXPECT_EQ(swirl::to_hex64(0), "0000000000000000");
    EXPECT_EQ(swirl::to_hex64(0xabcULL), "0000000000000abc");
}

TEST(HashBuilder, FieldBoundariesDoNotAlias)
{
    swirl::HashBuilder a, b;
    a.add("ab").add("c");
    b.add("a").add("bc");
    EXPECT_NE(a.digest(), b.digest());

    swirl::HashBuilder c, d;
    c.add(std::int64_t {1});
    d.add(std::int64_t {1});
    EXPECT_EQ(c.hex(), d.hex());
}
