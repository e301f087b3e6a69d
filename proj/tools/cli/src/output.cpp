#include "qhit_app/output.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "qhit/error.hpp"
#include "qhit_app/config.hpp"

namespace qhit::app {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw ResourceError("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

Csv::Csv(std::initializer_list<std::string_view> header) {
  for (auto h : header) add(h);
  end_row();
}

void Csv::separator() {
  if (row_open_) text_.push_back(',');
  row_open_ = true;
}

Csv& Csv::add(double x) {
  separator();
  text_ += format_double(x);
  return *this;
}

Csv& Csv::add(std::size_t n) {
  separator();
  text_ += std::to_string(n);
  return *this;
}

Csv& Csv::add(std::string_view s) {
  separator();
  text_ += s;
  return *this;
}

void Csv::end_row() {
  text_.push_back('\n');
  row_open_ = false;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw ResourceError("cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& name, std::string_view content, bool deterministic) {
  const auto path = root_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ResourceError("cannot write " + path.string());
  records_.push_back({name, sha256_hex(content), content.size(), deterministic});
}

void Timings::add(const std::string& phase, double seconds) { entries_.emplace_back(phase, seconds); }

namespace {
double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}
}  // namespace

Stopwatch::Stopwatch() : start_(now_seconds()) {}
double Stopwatch::seconds() const { return now_seconds() - start_; }

const char* version_tag() noexcept { return QHIT_VERSION; }

void write_manifest(const OutputDir& out, const std::string& command, const std::string& config_text,
                    unsigned long long seed, const Timings& timings) {
  nlohmann::ordered_json j;
  j["version"] = version_tag();
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config_text;
  auto& files = j["files"] = nlohmann::ordered_json::array();
  for (const auto& r : out.records())
    files.push_back({{"path", r.path}, {"sha256", r.sha256}, {"bytes", r.bytes}, {"deterministic", r.deterministic}});
  auto& t = j["timings"] = nlohmann::ordered_json::object();
  for (const auto& [phase, s] : timings.entries()) t[phase] = s;
  const std::string text = j.dump(2) + "\n";
  std::ofstream f(out.root() / "manifest.json", std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw ResourceError("cannot write manifest.json");
}

}  // namespace qhit::app
