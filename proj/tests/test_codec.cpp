#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "mpmab/codec.hpp"

using namespace mpmab;

namespace {

BitString apply_attack(const BitString& sent, unsigned pattern) {
  BitString received(sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i)
    received[i] = z_receive(sent[i], (pattern >> i) & 1u);
  return received;
}

}  // namespace

TEST_CASE("or-channel law") {
  CHECK(z_receive(0, 0) == 0);
  CHECK(z_receive(0, 1) == 1);
  CHECK(z_receive(1, 0) == 1);
  CHECK(z_receive(1, 1) == 1);
}

TEST_CASE("repetition code, exhaustive attacks up to h = 6") {
  for (int h = 1; h <= 6; ++h) {
    const unsigned all = (1u << h) - 1u;
    for (unsigned pattern = 0; pattern <= all; ++pattern) {
      // A transmitted 1 survives any attack.
      CHECK(r_decode(apply_attack(r_encode(1, h), pattern)) == 1);
      // A transmitted 0 flips only under the all-ones pattern.
      const Bit decoded = r_decode(apply_attack(r_encode(0, h), pattern));
      CHECK(decoded == (pattern == all ? 1 : 0));
    }
  }
}

TEST_CASE("repetition code shape and validation") {
  CHECK(r_encode(1, 4) == BitString{1, 1, 1, 1});
  CHECK(r_encode(0, 3) == BitString{0, 0, 0});
  CHECK_THROWS_AS(r_encode(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(r_encode(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(r_decode(BitString{}), std::invalid_argument);
}

TEST_CASE("index code digits") {
  CHECK(index_bits(2) == 1);
  CHECK(index_bits(3) == 2);
  CHECK(index_bits(4) == 2);
  CHECK(index_bits(5) == 3);
  CHECK(index_bits(8) == 3);
  CHECK(index_bits(9) == 4);
  CHECK(index_bits(1) == 1);
  // K=10 needs 4 digits; arm 7 encodes value 6 = 0110.
  const BitString word = r_encode_index(7, 10, 2);
  CHECK(word == BitString{0, 0, 1, 1, 1, 1, 0, 0});
}

TEST_CASE("index code round trip, all arms, several h") {
  for (int num_arms : {2, 3, 5, 8, 10, 17})
    for (int h : {1, 2, 3})
      for (int arm = 1; arm <= num_arms; ++arm) {
        const BitString word = r_encode_index(arm, num_arms, h);
        CHECK(static_cast<int>(word.size()) == index_bits(num_arms) * h);
        CHECK(r_decode_index(word, num_arms, h) == arm);
      }
}

TEST_CASE("index decode clamps out-of-range values to K") {
  // K=5 uses 3 digits; value 7 (arm 8) is expressible but invalid.
  BitString word = r_encode_index(5, 5, 2);
  for (auto& b : word) b = 1;  // decodes to value 8, beyond K=5
  CHECK(r_decode_index(word, 5, 2) == 5);
}

TEST_CASE("index decode validates word length") {
  CHECK_THROWS_AS(r_decode_index(BitString{1, 0, 1}, 10, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(r_encode_index(0, 10, 2), std::invalid_argument);
  CHECK_THROWS_AS(r_encode_index(11, 10, 2), std::invalid_argument);
}

TEST_CASE("constant-weight code shape") {
  const BitString word = e_encode(2, 3, 2);
  CHECK(word == BitString{0, 0, 1, 1, 0, 0});
  CHECK_THROWS_AS(e_encode(4, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(e_decode(BitString{1, 0}, 3, 2), std::invalid_argument);
}

TEST_CASE("constant-weight code, exhaustive attacks at K = 3, h = 3") {
  // 512 attack patterns per true arm. The true arm always survives; the
  // decode is a singleton exactly when no other block is fully covered.
  int multi_decodes = 0;
  for (int arm = 1; arm <= 3; ++arm) {
    const BitString sent = e_encode(arm, 3, 3);
    for (unsigned pattern = 0; pattern < 512; ++pattern) {
      const auto decoded = e_decode(apply_attack(sent, pattern), 3, 3);
      CHECK(std::find(decoded.begin(), decoded.end(), arm) != decoded.end());
      bool other_block_covered = false;
      for (int block = 0; block < 3; ++block) {
        if (block == arm - 1) continue;
        const unsigned mask = 0b111u << (3 * block);
        if ((pattern & mask) == mask) other_block_covered = true;
      }
      CHECK((decoded.size() == 1) == !other_block_covered);
      if (decoded.size() > 1) ++multi_decodes;
    }
  }
  // Inclusion-exclusion: per true arm, 2*2^6 - 2^3 = 120 patterns cover at
  // least one foreign block.
  CHECK(multi_decodes == 3 * 120);
}

TEST_CASE("constant-weight decode is ascending") {
  BitString word(3 * 2, 1);
  CHECK(e_decode(word, 3, 2) == std::vector<int>{1, 2, 3});
}
