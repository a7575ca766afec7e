#include "mpmab/codec.hpp"

#include <stdexcept>
#include <string>

namespace mpmab {

namespace {

void check_bit(Bit b) {
  if (b != 0 && b != 1) throw std::invalid_argument("codec: bit must be 0 or 1");
}

void check_len(int h) {
  if (h < 1) throw std::invalid_argument("codec: repetition length must be >= 1");
}

void check_arm(int arm, int num_arms) {
  if (num_arms < 1) throw std::invalid_argument("codec: need at least one arm");
  if (arm < 1 || arm > num_arms)
    throw std::invalid_argument("codec: arm " + std::to_string(arm) +
                                " out of range 1.." + std::to_string(num_arms));
}

}  // namespace

BitString r_encode(Bit bit, int h) {
  check_bit(bit);
  check_len(h);
  return BitString(static_cast<std::size_t>(h), bit);
}

Bit r_decode(const BitString& received) {
  if (received.empty()) throw std::invalid_argument("codec: empty codeword");
  for (Bit b : received) {
    check_bit(b);
    if (b == 0) return 0;
  }
  return 1;
}

int index_bits(int num_arms) {
  if (num_arms < 1) throw std::invalid_argument("codec: need at least one arm");
  int bits = 1;
  while ((1 << bits) < num_arms) ++bits;
  return bits;
}

BitString r_encode_index(int arm, int num_arms, int h) {
  check_arm(arm, num_arms);
  check_len(h);
  const int bits = index_bits(num_arms);
  const int value = arm - 1;
  BitString out;
  out.reserve(static_cast<std::size_t>(bits) * h);
  for (int i = bits - 1; i >= 0; --i) {
    const Bit digit = static_cast<Bit>((value >> i) & 1);
    out.insert(out.end(), static_cast<std::size_t>(h), digit);
  }
  return out;
}

int r_decode_index(const BitString& received, int num_arms, int h) {
  check_len(h);
  const int bits = index_bits(num_arms);
  if (received.size() != static_cast<std::size_t>(bits) * h)
    throw std::invalid_argument("codec: index codeword has wrong length");
  int value = 0;
  for (int i = 0; i < bits; ++i) {
    Bit digit = 1;
    for (int j = 0; j < h; ++j) {
      check_bit(received[static_cast<std::size_t>(i) * h + j]);
      if (received[static_cast<std::size_t>(i) * h + j] == 0) {
        digit = 0;
        break;
      }
    }
    value = (value << 1) | digit;
  }
  const int arm = value + 1;
  return arm > num_arms ? num_arms : arm;
}

BitString e_encode(int arm, int num_arms, int h) {
  check_arm(arm, num_arms);
  check_len(h);
  BitString out(static_cast<std::size_t>(num_arms) * h, 0);
  for (int j = 0; j < h; ++j)
    out[static_cast<std::size_t>(arm - 1) * h + j] = 1;
  return out;
}

std::vector<int> e_decode(const BitString& received, int num_arms, int h) {
  if (num_arms < 1) throw std::invalid_argument("codec: need at least one arm");
  check_len(h);
  if (received.size() != static_cast<std::size_t>(num_arms) * h)
    throw std::invalid_argument("codec: constant-weight codeword has wrong length");
  std::vector<int> arms;
  for (int k = 1; k <= num_arms; ++k) {
    bool all_ones = true;
    for (int j = 0; j < h; ++j) {
      const Bit b = received[static_cast<std::size_t>(k - 1) * h + j];
      check_bit(b);
      if (b == 0) {
        all_ones = false;
        break;
      }
    }
    if (all_ones) arms.push_back(k);
  }
  return arms;
}

}  // namespace mpmab
