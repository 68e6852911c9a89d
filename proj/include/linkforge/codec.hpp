#pragma once

#include <cstdint>
#include <vector>

#include "linkforge/action_space.hpp"

namespace linkforge {

using Bits = std::vector<uint8_t>;  // one bit per element, 0/1

// CRC-16 with polynomial 0x1021, init 0xFFFF, bit-at-a-time over the stream.
uint16_t crc16_ccitt(const Bits& bits);
void append_crc16(Bits& bits);
bool check_crc16(const Bits& bits_with_crc);  // last 16 bits are the checksum

struct EncodeResult {
    Bits coded;
    int pad_bits = 0;  // zeros appended to the info stream to fill the last block
};

// Uncoded / k-fold repetition / systematic Hamming(7,4) with single-error
// correction / terminated rate-1/2 convolutional code (K=7, 133/171 octal).
EncodeResult encode(const Bits& info, Coding coding);

// Inverse of encode; strips the recorded padding. Throws FramingError when
// the stream length is not a multiple of the code block.
Bits decode(const Bits& coded, Coding coding, int pad_bits);

// Coded bits forming the smallest independently decodable unit. The
// convolutional code is decoded as one terminated stream, so its block is the
// full coded payload for the given info length.
int coded_block_bits(Coding coding, int info_bits_with_crc);

int conv_coded_length(int info_bits);  // 2 * (info + 6 tail)

}  // namespace linkforge
