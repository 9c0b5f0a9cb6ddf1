#include "smctrack/params_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "smctrack/errors.hpp"
#include "text_util.hpp"

namespace smctrack {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

constexpr const char* kMagic = "smctrack-slm v1";

void append_tensor(std::string& out, const std::string& name, const Eigen::MatrixXd& m) {
  out += "tensor " + name + " " + std::to_string(m.rows()) + " " +
         std::to_string(m.cols()) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ' ';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
}

}  // namespace

std::string format_slm_model(const SlmModel& model) {
  std::string out;
  out += kMagic;
  out += '\n';
  out += "extractor_channels " + std::to_string(model.extractor.channels) + "\n";
  out += "extractor_patch_width " + std::to_string(model.extractor.patch_width) + "\n";
  out += "extractor_patch_height " + std::to_string(model.extractor.patch_height) + "\n";
  out += "extractor_seed " + std::to_string(model.extractor.seed) + "\n";
  out += "d_k " + std::to_string(model.attention.key_dim()) + "\n";
  out += "d " + std::to_string(model.attention.embedding_dim()) + "\n";
  for (int i = 0; i < 4; ++i) {
    append_tensor(out, "w_query_" + std::to_string(i),
                  model.attention.w_query[static_cast<std::size_t>(i)]);
    append_tensor(out, "w_key_" + std::to_string(i),
                  model.attention.w_key[static_cast<std::size_t>(i)]);
    append_tensor(out, "w_value_" + std::to_string(i),
                  model.attention.w_value[static_cast<std::size_t>(i)]);
  }
  append_tensor(out, "w_fc", model.attention.w_fc);
  out += "end\n";
  return out;
}

void save_slm_model(const SlmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << format_slm_model(model);
  if (!out) {
    throw IoError("failed while writing " + path.string());
  }
}

SlmModel parse_slm_model(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_number = 0;

  auto next_line = [&]() -> std::string_view {
    while (std::getline(in, line)) {
      ++line_number;
      const auto trimmed = trim(line);
      if (!trimmed.empty()) return trimmed;
    }
    throw ParseError(source, line_number, "unexpected end of archive");
  };

  if (next_line() != kMagic) {
    throw ParseError(source, line_number, "not a smctrack-slm v1 archive");
  }

  SlmModel model;
  std::map<std::string, long long> header;
  for (const char* key : {"extractor_channels", "extractor_patch_width",
                          "extractor_patch_height", "extractor_seed", "d_k", "d"}) {
    const auto fields = split(next_line(), ' ');
    if (fields.size() != 2 || fields[0] != key) {
      throw ParseError(source, line_number, std::string("expected '") + key + " <value>'");
    }
    long long value = 0;
    if (!parse_int(fields[1], value)) {
      throw ParseError(source, line_number, std::string(key) + " must be an integer");
    }
    header[key] = value;
  }
  model.extractor.channels = static_cast<int>(header["extractor_channels"]);
  model.extractor.patch_width = static_cast<int>(header["extractor_patch_width"]);
  model.extractor.patch_height = static_cast<int>(header["extractor_patch_height"]);
  model.extractor.seed = static_cast<std::uint64_t>(header["extractor_seed"]);

  auto read_tensor = [&](const std::string& expected_name) {
    const auto fields = split(next_line(), ' ');
    if (fields.size() != 4 || fields[0] != "tensor" || fields[1] != expected_name) {
      throw ParseError(source, line_number, "expected tensor " + expected_name);
    }
    long long rows = 0, cols = 0;
    if (!parse_int(fields[2], rows) || !parse_int(fields[3], cols) || rows <= 0 ||
        cols <= 0) {
      throw ParseError(source, line_number, "bad tensor dimensions");
    }
    Eigen::MatrixXd m(rows, cols);
    for (long long r = 0; r < rows; ++r) {
      const auto row_fields = split(next_line(), ' ');
      if (static_cast<long long>(row_fields.size()) != cols) {
        throw ParseError(source, line_number,
                         "expected " + std::to_string(cols) + " values in tensor row");
      }
      for (long long c = 0; c < cols; ++c) {
        double v = 0.0;
        if (!parse_double(row_fields[static_cast<std::size_t>(c)], v)) {
          throw ParseError(source, line_number, "tensor value is not a number");
        }
        m(r, c) = v;
      }
    }
    return m;
  };

  for (int i = 0; i < 4; ++i) {
    model.attention.w_query[static_cast<std::size_t>(i)] =
        read_tensor("w_query_" + std::to_string(i));
    model.attention.w_key[static_cast<std::size_t>(i)] =
        read_tensor("w_key_" + std::to_string(i));
    model.attention.w_value[static_cast<std::size_t>(i)] =
        read_tensor("w_value_" + std::to_string(i));
  }
  model.attention.w_fc = read_tensor("w_fc");
  if (next_line() != "end") {
    throw ParseError(source, line_number, "expected 'end'");
  }

  model.attention.validate();
  if (model.attention.key_dim() != static_cast<int>(header["d_k"]) ||
      model.attention.embedding_dim() != static_cast<int>(header["d"])) {
    throw ParseError(source, line_number, "tensor shapes disagree with d_k/d header");
  }
  return model;
}

SlmModel load_slm_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return parse_slm_model(in, path.string());
}

}  // namespace smctrack
