#include "facevalue/manifest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "facevalue/error.hpp"

namespace facevalue {

std::string tool_version() { return FACEVALUE_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(Errc::kIoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

nlohmann::json RunManifest::to_json() const {
  auto digests = [](const std::vector<FileDigest>& files) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  return {{"tool", "facevalue"},  {"version", tool_version()}, {"command", command},
          {"config", config},     {"seeds", seeds},            {"parameters", parameters},
          {"inputs", digests(inputs)}, {"outputs", digests(outputs)}};
}

}  // namespace facevalue
