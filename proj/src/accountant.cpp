#include "lseforge/accountant.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace lseforge {

bool MemAccountant::is_retained(std::string_view tag) { return tag.rfind("retained/", 0) == 0; }

void MemAccountant::record_alloc(std::string_view tag, std::size_t scalars, ScalarKind kind) {
  auto it = tags_.find(tag);
  if (it == tags_.end()) {
    it = tags_.emplace(std::string(tag), TagStat{0, 0, kind}).first;
  } else if (it->second.kind != kind) {
    throw std::invalid_argument("MemAccountant::record_alloc: tag '" + std::string(tag) +
                                "' reused with a different scalar kind");
  }
  it->second.current += scalars;
  it->second.peak = std::max(it->second.peak, it->second.current);

  std::size_t* cur;
  std::size_t* pk;
  if (is_retained(tag)) {
    cur = kind == ScalarKind::kReal ? &current_.retained_real : &current_.retained_index;
    pk = kind == ScalarKind::kReal ? &peak_.retained_real : &peak_.retained_index;
  } else {
    cur = kind == ScalarKind::kReal ? &current_.scratch_real : &current_.scratch_index;
    pk = kind == ScalarKind::kReal ? &peak_.scratch_real : &peak_.scratch_index;
  }
  *cur += scalars;
  *pk = std::max(*pk, *cur);
}

void MemAccountant::record_free(std::string_view tag, std::size_t scalars, ScalarKind kind) {
  auto it = tags_.find(tag);
  if (it == tags_.end() || it->second.kind != kind || it->second.current < scalars) {
    throw std::invalid_argument("MemAccountant::record_free: tag '" + std::string(tag) +
                                "' freeing " + std::to_string(scalars) +
                                " scalars that were never allocated");
  }
  it->second.current -= scalars;
  std::size_t* cur;
  if (is_retained(tag)) {
    cur = kind == ScalarKind::kReal ? &current_.retained_real : &current_.retained_index;
  } else {
    cur = kind == ScalarKind::kReal ? &current_.scratch_real : &current_.scratch_index;
  }
  *cur -= scalars;
}

void MemAccountant::record_ensure(std::string_view tag, std::size_t scalars, ScalarKind kind) {
  const std::size_t have = live(tag);
  if (have < scalars) record_alloc(tag, scalars - have, kind);
}

void MemAccountant::record_free_prefix(std::string_view prefix) {
  std::vector<std::pair<std::string, std::pair<std::size_t, ScalarKind>>> pending;
  for (const auto& [tag, stat] : tags_) {
    if (stat.current > 0 && tag.rfind(prefix, 0) == 0) {
      pending.emplace_back(tag, std::make_pair(stat.current, stat.kind));
    }
  }
  for (const auto& [tag, info] : pending) record_free(tag, info.first, info.second);
}

std::size_t MemAccountant::live(std::string_view tag) const {
  auto it = tags_.find(tag);
  return it == tags_.end() ? 0 : it->second.current;
}

void MemAccountant::expect_scratch_released() const {
  for (const auto& [tag, stat] : tags_) {
    if (!is_retained(tag) && stat.current != 0) {
      throw std::logic_error("MemAccountant: scratch tag '" + tag + "' still holds " +
                             std::to_string(stat.current) + " scalars");
    }
  }
}

void MemAccountant::reset() {
  tags_.clear();
  current_ = Totals{};
  peak_ = Totals{};
}

}  // namespace lseforge
