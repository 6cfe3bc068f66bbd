#include "dermfuse/image_io.hpp"

#include <cstdio>
#include <csetjmp>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "dermfuse/error.hpp"
#include "dermfuse/textio.hpp"

namespace dermfuse {

namespace {

RasterImage decode_png(const std::string& data, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return RasterImage::from_bytes(static_cast<int>(image.width), static_cast<int>(image.height),
                                 std::move(pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RasterImage decode_jpeg(const std::string& data, const std::filesystem::path& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = on_jpeg_error;
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("cannot decode JPEG " + path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, reinterpret_cast<const unsigned char*>(data.data()),
               static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return RasterImage::from_bytes(width, height, std::move(pixels));
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
  const auto data = textio::read_file(path);
  static constexpr unsigned char kPngSig[] = {0x89, 'P', 'N', 'G'};
  if (data.size() >= 4 && std::memcmp(data.data(), kPngSig, 4) == 0) return decode_png(data, path);
  if (data.size() >= 2 && static_cast<unsigned char>(data[0]) == 0xFF &&
      static_cast<unsigned char>(data[1]) == 0xD8) {
    return decode_jpeg(data, path);
  }
  throw IoError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const RasterImage& img) {
  const auto bytes_img = img.to_bytes();
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(bytes_img.width());
  image.height = static_cast<png_uint_32>(bytes_img.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  auto px = bytes_img.bytes();
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, px.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + image.message);
  }
  buffer.resize(size);
  textio::write_file_atomic(path, buffer);
}

}  // namespace dermfuse
