#include "pvae/cli/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "pvae/errors.hpp"

namespace pvae::cli {

void ReportWriter::add(const Record& record) {
  bool first = true;
  for (const auto& [k, v] : record) {
    if (!first) text_ += '\t';
    first = false;
    text_ += k;
    text_ += '=';
    for (char c : v) text_ += (c == '\t' || c == '\n' || c == '\r') ? ' ' : c;
  }
  text_ += '\n';
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Record parse_record(const std::string& line) {
  Record r;
  std::istringstream in(line);
  for (std::string field; std::getline(in, field, '\t');) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      r.emplace_back(field, "");
    } else {
      r.emplace_back(field.substr(0, eq), field.substr(eq + 1));
    }
  }
  return r;
}

}  // namespace pvae::cli
