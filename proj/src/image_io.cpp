#include "parkvision/image_io.hpp"

#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace parkvision {

namespace {

ImageBuffer from_mat(const cv::Mat& mat, const std::string& origin) {
  if (mat.empty()) throw std::runtime_error("cannot decode image: " + origin);

  cv::Mat m = mat;
  if (m.channels() == 4) {
    cv::Mat rgb(m.rows, m.cols, CV_8UC3);
    cv::mixChannels({m}, {rgb}, {0, 0, 1, 1, 2, 2});
    m = rgb;
  }
  if (m.channels() != 1 && m.channels() != 3) {
    throw std::runtime_error("unsupported channel count " + std::to_string(m.channels()) +
                             " in " + origin);
  }

  const int channels = m.channels();
  std::vector<std::uint8_t> data(static_cast<std::size_t>(m.rows) * m.cols * channels);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    std::uint8_t* out = data.data() + static_cast<std::size_t>(y) * m.cols * channels;
    if (channels == 1) {
      std::copy(row, row + m.cols, out);
    } else {
      // OpenCV stores BGR
      for (int x = 0; x < m.cols; ++x) {
        out[x * 3 + 0] = row[x * 3 + 2];
        out[x * 3 + 1] = row[x * 3 + 1];
        out[x * 3 + 2] = row[x * 3 + 0];
      }
    }
  }
  return ImageBuffer(m.cols, m.rows, channels, std::move(data));
}

cv::Mat to_mat(const ImageBuffer& image) {
  const int type = image.channels() == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat m(image.height(), image.width(), type);
  for (int y = 0; y < image.height(); ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      if (image.channels() == 1) {
        row[x] = image.at(x, y, 0);
      } else {
        row[x * 3 + 0] = image.at(x, y, 2);
        row[x * 3 + 1] = image.at(x, y, 1);
        row[x * 3 + 2] = image.at(x, y, 0);
      }
    }
  }
  return m;
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  return from_mat(m, path.string());
}

void save_image(const ImageBuffer& image, const std::filesystem::path& path) {
  if (!cv::imwrite(path.string(), to_mat(image))) {
    throw std::runtime_error("cannot write image: " + path.string());
  }
}

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& image, int quality) {
  std::vector<std::uint8_t> bytes;
  const std::vector<int> params{cv::IMWRITE_JPEG_QUALITY, quality};
  if (!cv::imencode(".jpg", to_mat(image), bytes, params)) {
    throw std::runtime_error("JPEG encoding failed");
  }
  return bytes;
}

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
  cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
  return from_mat(m, "in-memory buffer");
}

}  // namespace parkvision
