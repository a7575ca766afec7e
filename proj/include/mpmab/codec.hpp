#pragma once

#include <cstdint>
#include <vector>

namespace mpmab {

// Bits travel over an or-channel: a pull on the receiver's listening arm
// means 1, staying away means 0, and an adversarial loss-1 slot turns an
// intended 0 into an observed 1. A transmitted 1 can never be knocked back
// to 0, which is what every code below leans on.

using Bit = std::uint8_t;  // 0 or 1
using BitString = std::vector<Bit>;

// Channel law for one slot: received = sent OR attack.
inline Bit z_receive(Bit sent, Bit attack) { return sent | attack ? 1 : 0; }

// Repetition code for a single bit, length h >= 1.
BitString r_encode(Bit bit, int h);

// Decodes to 1 iff every received slot is 1; any 0 pins the sent bit to 0.
Bit r_decode(const BitString& received);

// Number of binary digits used to address arms 1..K (at least one).
int index_bits(int num_arms);

// Arm index 1..K as big-endian binary of (arm-1), each digit repeated h
// times. Total length index_bits(K) * h.
BitString r_encode_index(int arm, int num_arms, int h);

// Inverse of r_encode_index under per-digit majority-free repetition
// decoding; out-of-range results clamp to K so corrupted words still map to
// a valid arm.
int r_decode_index(const BitString& received, int num_arms, int h);

// Constant-weight code: K blocks of h slots, block (arm) all ones, the rest
// zero. An attack can only add ones, so the true block always survives and
// any extra all-one block is a visible error.
BitString e_encode(int arm, int num_arms, int h);

// All arms whose block came back all ones, ascending. Size 1 means a clean
// decode; larger means a detected corruption (the true arm is still in the
// set under the or-channel).
std::vector<int> e_decode(const BitString& received, int num_arms, int h);

}  // namespace mpmab
