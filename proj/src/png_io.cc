/*
 * Copyright 2026 The Nuclei Curation Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nuclei_curation/png_io.h"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nuclei_curation/error.h"

namespace nuclei_curation {

namespace {

constexpr char kModule[] = "png";

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t offset;
};

void ReadFromCursor(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->size) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, cursor->data + cursor->offset, length);
  cursor->offset += length;
}

void WriteToVector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void FlushNothing(png_structp) {}

// libpng reports errors through longjmp; the message is kept here so the
// C++ side can throw after the jump.
struct ErrorSink {
  char message[256] = "unknown libpng error";
};

void OnPngError(png_structp png, png_const_charp message) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::strncpy(sink->message, message, sizeof(sink->message) - 1);
  png_longjmp(png, 1);
}

void OnPngWarning(png_structp, png_const_charp) {}

int ColorTypeForChannels(int channels) {
  switch (channels) {
    case 1:
      return PNG_COLOR_TYPE_GRAY;
    case 2:
      return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3:
      return PNG_COLOR_TYPE_RGB;
    case 4:
      return PNG_COLOR_TYPE_RGB_ALPHA;
    default:
      throw Error(ErrorKind::kInvalidArgument, kModule,
                  "unsupported channel count " + std::to_string(channels));
  }
}

// All C++ objects touched between setjmp and a possible longjmp are created
// by the caller, so the jump never skips a destructor.
bool DecodeInto(const std::vector<std::uint8_t>& bytes, bool header_only,
                Raster& raster, std::vector<std::uint8_t>& row,
                ErrorSink& sink) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink,
                                           OnPngError, OnPngWarning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &cursor, ReadFromCursor);
  png_read_info(png, info);
  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  if (header_only) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
  }
  const int color_type = png_get_color_type(png, info);
  const int stored_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && stored_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  const int passes = png_set_interlace_handling(png);
  png_read_update_info(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);
  raster.channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  row.resize(row_bytes * static_cast<std::size_t>(raster.height));
  raster.samples.resize(static_cast<std::size_t>(raster.width) *
                        raster.height * raster.channels);
  // Interlaced passes refine the same full-size rows.
  for (int pass = 0; pass < passes; ++pass) {
    for (int y = 0; y < raster.height; ++y) {
      png_read_row(png, row.data() + row_bytes * y, nullptr);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "io", "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorKind::kIo, "io", "cannot read " + path.string());
  }
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorKind::kIo, "io", "cannot write " + path.string());
  }
}

Raster DecodePng(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::kInvalidArgument, kModule, "not a PNG stream");
  }
  Raster raster;
  std::vector<std::uint8_t> packed;
  ErrorSink sink;
  if (!DecodeInto(bytes, /*header_only=*/false, raster, packed, sink)) {
    throw Error(ErrorKind::kInvalidArgument, kModule, sink.message);
  }
  const std::size_t n = raster.samples.size();
  if (raster.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      raster.samples[i] = static_cast<std::uint16_t>(
          (packed[2 * i] << 8) | packed[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) raster.samples[i] = packed[i];
  }
  return raster;
}

Raster ReadPng(const std::filesystem::path& path) {
  try {
    return DecodePng(ReadFileBytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(ErrorKind::kInvalidArgument, kModule,
                path.string() + ": " + e.what());
  }
}

ImageSize ReadPngSize(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                path.string() + " is not a PNG file");
  }
  Raster raster;
  std::vector<std::uint8_t> unused;
  ErrorSink sink;
  if (!DecodeInto(bytes, /*header_only=*/true, raster, unused, sink)) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                path.string() + ": " + sink.message);
  }
  return {raster.width, raster.height};
}

std::vector<std::uint8_t> EncodePng(const Raster& raster) {
  if (raster.bit_depth != 8 && raster.bit_depth != 16) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "only 8- and 16-bit output is supported");
  }
  const int color_type = ColorTypeForChannels(raster.channels);
  if (raster.width < 1 || raster.height < 1 ||
      raster.samples.size() != static_cast<std::size_t>(raster.width) *
                                   raster.height * raster.channels) {
    throw Error(ErrorKind::kInvalidArgument, kModule,
                "raster samples do not match its dimensions");
  }
  const int bytes_per_sample = raster.bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(raster.width) *
                                raster.channels * bytes_per_sample;
  std::vector<std::uint8_t> packed(row_bytes * raster.height);
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      packed[2 * i] = static_cast<std::uint8_t>(raster.samples[i] >> 8);
      packed[2 * i + 1] = static_cast<std::uint8_t>(raster.samples[i] & 0xff);
    } else {
      packed[i] = static_cast<std::uint8_t>(raster.samples[i]);
    }
  }
  std::vector<std::uint8_t> out;
  ErrorSink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink,
                                            OnPngError, OnPngWarning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorKind::kIo, kModule, "cannot allocate libpng state");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kInvalidArgument, kModule, sink.message);
  }
  png_set_write_fn(png, &out, WriteToVector, FlushNothing);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width),
               static_cast<png_uint_32>(raster.height), raster.bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < raster.height; ++y) {
    png_write_row(png, packed.data() + row_bytes * y);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void WritePng(const std::filesystem::path& path, const Raster& raster) {
  WriteFileBytes(path, EncodePng(raster));
}

InstanceMask ReadLabelMapPng(const std::filesystem::path& path) {
  const Raster raster = ReadPng(path);
  try {
    return DecodeLabelMap(raster, raster.width, raster.height);
  } catch (const Error& e) {
    throw Error(ErrorKind::kInvalidArgument, "mask",
                path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodeLabelMapPng(const InstanceMask& mask) {
  Raster raster;
  raster.width = mask.width;
  raster.height = mask.height;
  raster.bit_depth = 16;
  raster.channels = 1;
  raster.samples.assign(mask.labels.begin(), mask.labels.end());
  return EncodePng(raster);
}

void WriteLabelMapPng(const std::filesystem::path& path,
                      const InstanceMask& mask) {
  WriteFileBytes(path, EncodeLabelMapPng(mask));
}

RgbImage ToRgb(const Raster& raster) {
  RgbImage image;
  image.width = raster.width;
  image.height = raster.height;
  const std::size_t n = static_cast<std::size_t>(raster.width) * raster.height;
  image.rgb.resize(n * 3);
  const int shift = raster.bit_depth == 16 ? 8 : 0;
  const int c = raster.channels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t* px = raster.samples.data() + i * c;
    for (int k = 0; k < 3; ++k) {
      // Gray (+alpha) replicates channel 0; RGB(A) takes channel k.
      const int source = c >= 3 ? k : 0;
      image.rgb[i * 3 + k] = static_cast<std::uint8_t>(px[source] >> shift);
    }
  }
  return image;
}

Raster FromRgb(const RgbImage& image) {
  Raster raster;
  raster.width = image.width;
  raster.height = image.height;
  raster.bit_depth = 8;
  raster.channels = 3;
  raster.samples.assign(image.rgb.begin(), image.rgb.end());
  return raster;
}

RgbImage ReadRgbPng(const std::filesystem::path& path) {
  return ToRgb(ReadPng(path));
}

void WriteRgbPng(const std::filesystem::path& path, const RgbImage& image) {
  WritePng(path, FromRgb(image));
}

}  // namespace nuclei_curation
