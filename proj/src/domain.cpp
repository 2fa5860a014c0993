// Copyright 2026 The JITAI Bandit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "jitai/domain.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "jitai/jsonl.hpp"

namespace jitai {
namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view token, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (name == token) return value;
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Category, std::string_view>, 4> kCategoryTokens{{
    {Category::PhysicalActivity, "PA"},
    {Category::MentalRelaxation, "MR"},
    {Category::CognitiveActivity, "CA"},
    {Category::EmotionalSocialEngagement, "ESE"},
}};

constexpr std::array<std::pair<ActivityContext, std::string_view>, 10> kActivityTokens{{
    {ActivityContext::AttendingLecture, "attending_lecture"},
    {ActivityContext::Exercise, "exercise"},
    {ActivityContext::Relaxing, "relaxing"},
    {ActivityContext::InVehicle, "in_vehicle"},
    {ActivityContext::Cycling, "cycling"},
    {ActivityContext::Walking, "walking"},
    {ActivityContext::Running, "running"},
    {ActivityContext::Studying, "studying"},
    {ActivityContext::Eating, "eating"},
    {ActivityContext::Standing, "standing"},
}};

constexpr std::array<std::pair<SocialContext, std::string_view>, 3> kSocialTokens{{
    {SocialContext::Alone, "alone"},
    {SocialContext::WithSomeoneConversing, "with_someone_conversing"},
    {SocialContext::WithSomeoneNotConversing, "with_someone_not_conversing"},
}};

constexpr std::array<std::pair<Response, std::string_view>, 4> kResponseTokens{{
    {Response::Yes, "yes"},
    {Response::No, "no"},
    {Response::NotFeasibleNow, "not_feasible"},
    {Response::Missed, "missed"},
}};

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

}  // namespace

std::string_view to_token(Category c) { return name_of(c, kCategoryTokens); }
std::string_view to_token(ActivityContext c) { return name_of(c, kActivityTokens); }
std::string_view to_token(SocialContext c) { return name_of(c, kSocialTokens); }
std::string_view to_token(Response r) { return name_of(r, kResponseTokens); }

std::optional<Category> parse_category(std::string_view token) { return lookup(token, kCategoryTokens); }
std::optional<ActivityContext> parse_activity(std::string_view token) { return lookup(token, kActivityTokens); }
std::optional<SocialContext> parse_social(std::string_view token) { return lookup(token, kSocialTokens); }
std::optional<Response> parse_response(std::string_view token) { return lookup(token, kResponseTokens); }

ActivityContext require_activity(std::string_view token) {
  if (auto c = parse_activity(token)) return *c;
  throw DomainError("unknown activity context: " + std::string(token));
}

SocialContext require_social(std::string_view token) {
  if (auto c = parse_social(token)) return *c;
  throw DomainError("unknown social context: " + std::string(token));
}

Response require_response(std::string_view token) {
  if (auto r = parse_response(token)) return *r;
  throw DomainError("unknown response token: " + std::string(token));
}

InterventionCatalog::InterventionCatalog(std::vector<Intervention> items) : items_(std::move(items)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& item : items_) {
    if (item.id.empty()) throw DomainError("intervention with empty id");
    if (!seen.insert(item.id).second) throw DomainError("duplicate intervention id: " + item.id);
  }
}

const Intervention* InterventionCatalog::find(std::string_view id) const {
  for (const auto& item : items_) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

std::optional<std::size_t> InterventionCatalog::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> InterventionCatalog::ids() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back(item.id);
  return out;
}

InterventionCatalog load_catalog(std::istream& in) {
  std::vector<Intervention> items;
  for_each_json_line(in, [&](std::size_t line_no, const Json& doc) {
    try {
      Intervention item;
      item.id = doc.at("id").get<std::string>();
      item.name = doc.value("name", item.id);
      const auto token = doc.at("category").get<std::string>();
      const auto category = parse_category(token);
      if (!category) throw DomainError(where(line_no) + "unknown category: " + token);
      item.category = *category;
      items.push_back(std::move(item));
    } catch (const Json::exception& e) {
      throw DomainError(where(line_no) + e.what());
    }
  });
  if (items.empty()) throw DomainError("catalog document contains no interventions");
  return InterventionCatalog(std::move(items));
}

std::vector<SurveyTally> load_tallies(std::istream& in) {
  std::vector<SurveyTally> out;
  for_each_json_line(in, [&](std::size_t line_no, const Json& doc) {
    try {
      SurveyTally t;
      t.context = require_activity(doc.at("context").get<std::string>());
      t.intervention_id = doc.at("intervention_id").get<std::string>();
      t.yes_count = doc.at("yes").get<int>();
      t.total_count = doc.at("total").get<int>();
      out.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw DomainError(where(line_no) + e.what());
    } catch (const DomainError& e) {
      throw DomainError(where(line_no) + e.what());
    }
  });
  return out;
}

void write_tallies(std::ostream& out, std::span<const SurveyTally> tallies) {
  for (const auto& t : tallies) {
    Json doc{{"context", to_token(t.context)},
             {"intervention_id", t.intervention_id},
             {"yes", t.yes_count},
             {"total", t.total_count}};
    out << doc.dump() << '\n';
  }
}

void PriorMatrix::set(ActivityContext context, const std::string& intervention_id, PriorEntry entry) {
  entries_[{context, intervention_id}] = entry;
}

std::optional<PriorEntry> PriorMatrix::get(ActivityContext context, std::string_view intervention_id) const {
  auto it = entries_.find(std::pair<ActivityContext, std::string>{context, std::string(intervention_id)});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool PriorMatrix::has_context(ActivityContext context) const {
  for (const auto& id : arm_order_) {
    if (get(context, id)) return true;
  }
  return false;
}

void PriorMatrix::validate() const {
  for (auto context : kActivityContexts) {
    if (has_context(context)) (void)eligible_arms(*this, context);
  }
}

PriorMatrix elicit_priors(const InterventionCatalog& catalog, std::span<const SurveyTally> tallies,
                          const ElicitationParams& params) {
  if (params.threshold < 0.0 || params.threshold > 1.0) throw DomainError("threshold must lie in [0, 1]");
  if (params.cap_adjustment < 0.0 || params.cap_adjustment >= 1.0) {
    throw DomainError("cap adjustment must lie in [0, 1)");
  }

  PriorMatrix matrix(catalog.ids());
  std::set<std::pair<ActivityContext, std::string>> seen;
  std::set<ActivityContext> contexts;
  for (const auto& t : tallies) {
    if (!catalog.find(t.intervention_id)) {
      throw DomainError("tally references unknown intervention: " + t.intervention_id);
    }
    if (t.total_count <= 0) {
      throw DomainError("tally total must be positive for " + t.intervention_id + " in " +
                        std::string(to_token(t.context)));
    }
    if (t.yes_count < 0 || t.yes_count > t.total_count) {
      throw DomainError("tally yes count outside [0, total] for " + t.intervention_id + " in " +
                        std::string(to_token(t.context)));
    }
    if (!seen.insert({t.context, t.intervention_id}).second) {
      throw DomainError("duplicate tally for " + t.intervention_id + " in " + std::string(to_token(t.context)));
    }
    contexts.insert(t.context);

    const double raw = static_cast<double>(t.yes_count) / static_cast<double>(t.total_count);
    PriorEntry entry;
    entry.excluded = raw < params.threshold;
    entry.probability = (t.yes_count == t.total_count) ? raw - params.cap_adjustment : raw;
    matrix.set(t.context, t.intervention_id, entry);
  }

  for (auto context : kActivityContexts) {
    if (!contexts.contains(context)) {
      throw DomainError("no survey tallies for context " + std::string(to_token(context)));
    }
  }
  matrix.validate();
  return matrix;
}

std::vector<std::string> eligible_arms(const PriorMatrix& priors, ActivityContext context) {
  std::vector<std::string> out;
  bool present = false;
  for (const auto& id : priors.arm_order()) {
    const auto entry = priors.get(context, id);
    if (!entry) continue;
    present = true;
    if (!entry->excluded) out.push_back(id);
  }
  if (!present) throw DomainError("context missing from prior matrix: " + std::string(to_token(context)));
  if (out.empty()) throw DomainError("no eligible interventions for context " + std::string(to_token(context)));
  return out;
}

double reported_probability(double p) { return std::round(p * 1000.0) / 1000.0; }

void write_prior_table(std::ostream& out, const PriorMatrix& priors) {
  out << "intervention";
  for (auto context : kActivityContexts) out << ',' << to_token(context);
  out << '\n';
  char buf[32];
  for (const auto& id : priors.arm_order()) {
    out << id;
    for (auto context : kActivityContexts) {
      out << ',';
      const auto entry = priors.get(context, id);
      if (!entry) continue;
      std::snprintf(buf, sizeof buf, "%.3f", reported_probability(entry->probability));
      out << buf;
      if (entry->excluded) out << '*';
    }
    out << '\n';
  }
}

PriorMatrix read_prior_table(std::istream& in, const InterventionCatalog& catalog, double threshold) {
  std::vector<ActivityContext> columns;
  PriorMatrix matrix(catalog.ids());
  bool header = true;
  for_each_line(in, [&](std::size_t line_no, const std::string& text) {
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!text.empty() && text.back() == ',') cells.emplace_back();

    if (header) {
      header = false;
      if (cells.empty() || cells.front() != "intervention") {
        throw DomainError(where(line_no) + "prior table must start with an 'intervention' column");
      }
      for (std::size_t i = 1; i < cells.size(); ++i) columns.push_back(require_activity(cells[i]));
      return;
    }
    if (cells.size() != columns.size() + 1) {
      throw DomainError(where(line_no) + "expected " + std::to_string(columns.size() + 1) + " cells");
    }
    const std::string& id = cells.front();
    if (!catalog.find(id)) throw DomainError(where(line_no) + "unknown intervention: " + id);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      std::string value = cells[i];
      if (value.empty()) continue;
      bool marked = false;
      if (value.back() == '*') {
        marked = true;
        value.pop_back();
      }
      double p = 0.0;
      try {
        std::size_t used = 0;
        p = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw DomainError(where(line_no) + "bad probability '" + cells[i] + "'");
      }
      if (p < 0.0 || p > 1.0) throw DomainError(where(line_no) + "probability outside [0, 1]");
      if (marked != (p < threshold)) {
        throw DomainError(where(line_no) + "exclusion mark inconsistent with threshold for " + id + " in " +
                          std::string(to_token(columns[i - 1])));
      }
      matrix.set(columns[i - 1], id, PriorEntry{p, marked});
    }
  });
  if (header) throw DomainError("prior table is empty");
  matrix.validate();
  return matrix;
}

void write_prior_jsonl(std::ostream& out, const PriorMatrix& priors) {
  for (auto context : kActivityContexts) {
    for (const auto& id : priors.arm_order()) {
      const auto entry = priors.get(context, id);
      if (!entry) continue;
      Json doc{{"context", to_token(context)},
               {"intervention_id", id},
               {"probability", reported_probability(entry->probability)},
               {"excluded", entry->excluded}};
      out << doc.dump() << '\n';
    }
  }
}

}  // namespace jitai
