#include "influ/http_client.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "influ/common.hpp"

namespace influ {

namespace {

double steady_now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

uint64_t fnv1a64(const std::string& s) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string sanitize_for_filename(const std::string& s) {
  std::string out;
  for (char c : s) {
    bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                c == '.' || c == '-' || c == '_';
    out += keep ? c : '_';
  }
  if (out.size() > 120) out.resize(120);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return out + "." + hex;
}

}  // namespace

TokenBucket::TokenBucket(double tokens_per_second, double burst)
    : rate_(tokens_per_second), burst_(burst), available_(burst) {
  if (rate_ <= 0.0 || burst_ <= 0.0) throw DataError("token bucket rate and burst must be > 0");
}

bool TokenBucket::consume(double now_seconds) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!started_) {
    started_ = true;
    last_refill_ = now_seconds;
  }
  if (now_seconds > last_refill_) {
    available_ = std::min(burst_, available_ + (now_seconds - last_refill_) * rate_);
    last_refill_ = now_seconds;
  }
  if (available_ >= 1.0) {
    available_ -= 1.0;
    return true;
  }
  return false;
}

void TokenBucket::acquire() {
  while (!consume(steady_now_seconds()))
    std::this_thread::sleep_for(std::chrono::duration<double>(0.5 / rate_));
}

HttpSource::HttpSource(Options options)
    : options_(std::move(options)),
      bucket_(options_.rate, options_.burst),
      jitter_rng_(options_.retry.jitter_seed) {}

std::string HttpSource::cache_path(const std::string& path_and_query) const {
  return options_.cache_dir + "/" + options_.name + "/" + sanitize_for_filename(path_and_query) +
         ".json";
}

double HttpSource::backoff_seconds(int attempt) {
  double base = options_.retry.initial_backoff_s * std::pow(2.0, attempt);
  base = std::min(base, options_.retry.max_backoff_s);
  std::lock_guard<std::mutex> lock(jitter_mu_);
  double jitter = static_cast<double>(jitter_rng_() >> 11) * 0x1.0p-53;
  return base * (0.5 + 0.5 * jitter);
}

HttpSource::Response HttpSource::get(const std::string& path_and_query) {
  const bool caching = !options_.cache_dir.empty();
  const std::string cached_at = caching ? cache_path(path_and_query) : "";

  if (caching) {
    std::ifstream in(cached_at);
    if (in) {
      nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
      if (!j.is_discarded()) {
        cache_hits_++;
        return {j.value("status", 0), j.value("body", ""), true};
      }
    }
  }
  if (options_.offline)
    throw SourceError(options_.name + ": offline and no cached response for " + path_and_query);

  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
    if (attempt > 0) {
      retries_++;
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff_seconds(attempt - 1)));
    }
    bucket_.acquire();
    requests_sent_++;

    httplib::Client client(options_.base_url);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);
    httplib::Headers headers(options_.headers.begin(), options_.headers.end());
    auto res = client.Get(path_and_query, headers);

    if (!res) {
      last_failure = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    Response out{res->status, res->body, false};
    if (caching && (res->status == 200 || res->status == 404)) {
      std::filesystem::create_directories(options_.cache_dir + "/" + options_.name);
      nlohmann::json j;
      j["status"] = out.status;
      j["body"] = out.body;
      // Unique temp name: concurrent workers may race on the same entry.
      std::ostringstream suffix;
      suffix << ".tmp." << std::this_thread::get_id();
      std::string tmp = cached_at + suffix.str();
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << j.dump();
      }
      std::filesystem::rename(tmp, cached_at);
    }
    return out;
  }
  throw SourceError(options_.name + ": gave up on " + path_and_query + " after " +
                    std::to_string(options_.retry.max_attempts) + " attempts; last: " +
                    last_failure);
}

}  // namespace influ
