#include "citeimpact/harness/fetch.hpp"

#include <curl/curl.h>

#include <cctype>
#include <cstdio>
#include <memory>

#include "citeimpact/common/error.hpp"
#include "citeimpact/common/hash.hpp"

namespace citeimpact {
namespace {

std::size_t write_to_file(char* data, std::size_t size, std::size_t count, void* file) {
  return std::fwrite(data, size, count, static_cast<std::FILE*>(file)) * size;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::string fetch_file(const std::string& url, const std::filesystem::path& destination,
                       const std::optional<std::string>& expected_sha256) {
  static const bool initialised = curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK;
  if (!initialised) throw IoError("libcurl failed to initialise");

  if (destination.has_parent_path()) std::filesystem::create_directories(destination.parent_path());
  const auto partial = destination.string() + ".part";
  {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(partial.c_str(), "wb"),
                                                         &std::fclose);
    if (!file) throw IoError("cannot write " + partial);
    std::unique_ptr<CURL, void (*)(CURL*)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw IoError("libcurl handle allocation failed");
    char error[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_file);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, file.get());
    curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, error);
    const auto code = curl_easy_perform(curl.get());
    if (code != CURLE_OK) {
      file.reset();
      std::filesystem::remove(partial);
      throw IoError("fetch of " + url + " failed: " +
                    (error[0] ? std::string(error) : curl_easy_strerror(code)));
    }
  }
  const auto digest = sha256_file(partial);
  if (expected_sha256 && lower(*expected_sha256) != digest) {
    std::filesystem::remove(partial);
    throw IntegrityError("checksum mismatch for " + url + ": expected " + *expected_sha256 +
                         ", got " + digest);
  }
  std::filesystem::rename(partial, destination);
  return digest;
}

}  // namespace citeimpact
