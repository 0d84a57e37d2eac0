#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <string>

namespace influ {

// Classic token bucket. The pure consume() takes an explicit clock so tests
// can drive it; acquire() blocks on the steady clock.
class TokenBucket {
 public:
  TokenBucket(double tokens_per_second, double burst);

  // Refills up to `now_seconds` and takes one token if available. Time moving
  // backwards is ignored (out-of-order callers cannot mint tokens).
  bool consume(double now_seconds);
  void acquire();

  double rate() const { return rate_; }

 private:
  double rate_;
  double burst_;
  double available_;
  double last_refill_ = 0.0;
  bool started_ = false;
  std::mutex mu_;
};

struct RetryPolicy {
  int max_attempts = 4;
  double initial_backoff_s = 0.05;
  double max_backoff_s = 2.0;
  uint64_t jitter_seed = 1;
};

// Rate-limited, retrying, disk-cached GET client for one metadata source.
// Retries transport errors, 429 and 5xx with jittered exponential backoff;
// definitive statuses (200, 404, 4xx) are returned as-is. 200 and 404 are
// cached; --offline mode serves the cache only.
class HttpSource {
 public:
  struct Options {
    std::string name;       // cache subdirectory and log label
    std::string base_url;   // e.g. http://127.0.0.1:8080
    double rate = 20.0;     // requests per second
    double burst = 10.0;
    RetryPolicy retry;
    std::string cache_dir;  // empty disables caching
    bool offline = false;
    std::map<std::string, std::string> headers;
  };

  struct Response {
    int status = 0;
    std::string body;
    bool from_cache = false;
  };

  explicit HttpSource(Options options);

  // Throws SourceError when the source stays unreachable past the retry
  // budget, or when offline with a cold cache.
  Response get(const std::string& path_and_query);

  int64_t requests_sent() const { return requests_sent_.load(); }
  int64_t retries() const { return retries_.load(); }
  int64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string cache_path(const std::string& path_and_query) const;
  double backoff_seconds(int attempt);

  Options options_;
  TokenBucket bucket_;
  std::mt19937_64 jitter_rng_;
  std::mutex jitter_mu_;
  std::atomic<int64_t> requests_sent_{0};
  std::atomic<int64_t> retries_{0};
  std::atomic<int64_t> cache_hits_{0};
};

}  // namespace influ
