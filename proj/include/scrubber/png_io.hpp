#ifndef SCRUBBER_PNG_IO_HPP
#define SCRUBBER_PNG_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace scrubber::png {

/// 8-bit RGB, row-major interleaved.
void write_rgb8(const std::string& path, int width, int height, const std::vector<uint8_t>& rgb);
void read_rgb8(const std::string& path, int* width, int* height, std::vector<uint8_t>* rgb);

/// 16-bit single-channel (depth in millimeters, mask values, ...).
void write_gray16(const std::string& path, int width, int height,
                  const std::vector<uint16_t>& gray);
void read_gray16(const std::string& path, int* width, int* height, std::vector<uint16_t>* gray);

/// 8-bit single-channel masks.
void write_gray8(const std::string& path, int width, int height, const std::vector<uint8_t>& gray);
void read_gray8(const std::string& path, int* width, int* height, std::vector<uint8_t>* gray);

}  // namespace scrubber::png

#endif
