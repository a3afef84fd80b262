#include "segmig/emit.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace segmig {

bool WriteReport::ok() const {
  return std::all_of(files.begin(), files.end(), [](const Entry &e) { return e.error.empty(); });
}

std::string WriteReport::text() const {
  std::string out;
  for (const auto &e : files) {
    if (e.error.empty())
      out += e.path + " " + std::to_string(e.lines) + " lines\n";
    else
      out += e.path + " error: " + e.error + "\n";
  }
  return out;
}

namespace {

std::string to_latin1(const std::string &utf8) {
  std::string out;
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    auto c = static_cast<unsigned char>(utf8[i]);
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if ((c & 0xE0) == 0xC0 && i + 1 < utf8.size()) {
      unsigned cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(utf8[i + 1]) & 0x3Fu);
      out += cp <= 0xFF ? static_cast<char>(cp) : '?';
      ++i;
    } else {
      // outside Latin-1
      out += '?';
      while (i + 1 < utf8.size() && (static_cast<unsigned char>(utf8[i + 1]) & 0xC0) == 0x80)
        ++i;
    }
  }
  return out;
}

} // namespace

WriteReport write_tree(const std::vector<OutputFile> &outputs, const std::string &out_dir,
                       Encoding enc) {
  WriteReport report;
  for (const auto &f : outputs) {
    WriteReport::Entry e;
    e.path = f.path;
    e.lines = static_cast<int>(std::count(f.text.begin(), f.text.end(), '\n'));
    fs::path target = fs::path(out_dir) / f.path;
    fs::path tmp = target;
    tmp += ".tmp";
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
      e.error = "cannot create directory " + target.parent_path().string() + ": " + ec.message();
      report.files.push_back(e);
      continue;
    }
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (out) {
        std::string bytes = enc == Encoding::latin1 ? to_latin1(f.text) : f.text;
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      }
      if (!out) {
        e.error = "cannot write " + tmp.string();
        report.files.push_back(e);
        fs::remove(tmp, ec);
        continue;
      }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
      e.error = "cannot rename " + tmp.string() + ": " + ec.message();
      fs::remove(tmp, ec);
    }
    report.files.push_back(e);
  }
  return report;
}

} // namespace segmig
