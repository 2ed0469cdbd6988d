#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace lseforge {

// What a counted buffer holds: real scalars are charged at the configured
// dtype width, index scalars always at 8 bytes.
enum class ScalarKind { kReal, kIndex };

constexpr std::size_t kIndexBytes = 8;

// Logical allocation ledger for the loss layer. Ops report every buffer they
// create or drop; the ledger tracks live totals and high-water marks. Buffers
// tagged "retained/..." are outputs that outlive the op (positive logits, LSE,
// candidate indices); all other tags are scratch that must be freed before
// the op returns. Counting is in scalars, not bytes, so one set of numbers
// serves any storage width. Parallel kernels charge all per-worker buffers
// from the coordinating thread before fan-out, so recording needs no locks
// and reports are identical for every worker count.
class MemAccountant {
 public:
  struct TagStat {
    std::size_t current = 0;
    std::size_t peak = 0;
    ScalarKind kind = ScalarKind::kReal;
  };

  struct Totals {
    std::size_t retained_real = 0;
    std::size_t retained_index = 0;
    std::size_t scratch_real = 0;
    std::size_t scratch_index = 0;
  };

  struct Report {
    std::map<std::string, TagStat, std::less<>> tags;  // per-tag peaks
    Totals current;                                    // live right now
    Totals peak;  // high-water mark of each class total (max of the
                  // concurrent sum over time, not the sum of per-tag peaks)

    std::uint64_t retained_bytes(std::size_t dtype_bytes) const {
      return std::uint64_t{peak.retained_real} * dtype_bytes +
             std::uint64_t{peak.retained_index} * kIndexBytes;
    }
    std::uint64_t scratch_bytes(std::size_t dtype_bytes) const {
      return std::uint64_t{peak.scratch_real} * dtype_bytes +
             std::uint64_t{peak.scratch_index} * kIndexBytes;
    }
  };

  void record_alloc(std::string_view tag, std::size_t scalars, ScalarKind kind = ScalarKind::kReal);
  void record_free(std::string_view tag, std::size_t scalars, ScalarKind kind = ScalarKind::kReal);

  // Charge tag up to `scalars` live: allocates only the missing part. Lets a
  // backward pass stand alone (charging the activations itself) while a
  // forward+backward pair under one accountant charges each buffer once.
  void record_ensure(std::string_view tag, std::size_t scalars, ScalarKind kind = ScalarKind::kReal);

  // Free everything still live under tags starting with `prefix`.
  void record_free_prefix(std::string_view prefix);

  std::size_t live(std::string_view tag) const;

  Report report() const { return Report{tags_, current_, peak_}; }

  // Throws if any scratch tag is still live (an op leaked a temporary).
  void expect_scratch_released() const;

  void reset();

 private:
  static bool is_retained(std::string_view tag);

  std::map<std::string, TagStat, std::less<>> tags_;
  Totals current_;
  Totals peak_;
};

}  // namespace lseforge
