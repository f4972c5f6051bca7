/*
 * Copyright 2026 The LegalLens Pipeline Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// NER and NLI dataset types, readers/writers, BIO <-> span conversion and
// dataset statistics.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace legallens::corpus {

enum class EntityType { kLaw, kViolatedBy, kViolatedOn, kViolation };

inline constexpr std::array<EntityType, 4> kEntityTypes = {
    EntityType::kLaw, EntityType::kViolatedBy, EntityType::kViolatedOn,
    EntityType::kViolation};

// Upper-snake canonical name, e.g. "VIOLATED_BY".
std::string_view canonical_name(EntityType type);
// Human-readable form with spaces, e.g. "VIOLATED BY".
std::string_view display_name(EntityType type);
// Accepts canonical or spaced forms, case-insensitive. Returns nullopt for
// anything outside the four-type set.
std::optional<EntityType> parse_entity_type(std::string_view name);

// Token span with inclusive bounds.
struct GoldSpan {
  EntityType entity_type = EntityType::kLaw;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - start + 1; }
  friend bool operator==(const GoldSpan&, const GoldSpan&) = default;
};

struct NerExample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<GoldSpan> entities;
};

enum class NliLabel { kEntailed, kContradict, kNeutral };
inline constexpr std::array<NliLabel, 3> kNliLabels = {
    NliLabel::kEntailed, NliLabel::kContradict, NliLabel::kNeutral};

// Ordering of this enum is the ensemble tie-break order.
enum class Domain { kConsumerProtection, kPrivacy, kTcpa, kWage };
inline constexpr std::array<Domain, 4> kDomains = {
    Domain::kConsumerProtection, Domain::kPrivacy, Domain::kTcpa,
    Domain::kWage};

std::string_view label_name(NliLabel label);   // "Entailed"
std::string_view domain_name(Domain domain);   // "consumer_protection"
std::string_view domain_title(Domain domain);  // "Consumer Protection"
std::optional<NliLabel> parse_label(std::string_view name);
std::optional<Domain> parse_domain(std::string_view name);

inline std::size_t index_of(NliLabel label) {
  return static_cast<std::size_t>(label);
}
inline std::size_t index_of(Domain domain) {
  return static_cast<std::size_t>(domain);
}
inline std::size_t index_of(EntityType type) {
  return static_cast<std::size_t>(type);
}

// Audit trail attached to generated records. Ignored by training.
struct Provenance {
  std::string source_id;
  std::string prompt_name;
  std::string model_name;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct NliRecord {
  std::string id;
  std::string premise;
  std::string hypothesis;
  NliLabel label = NliLabel::kNeutral;
  Domain domain = Domain::kConsumerProtection;
  std::optional<Provenance> provenance;

  friend bool operator==(const NliRecord&, const NliRecord&) = default;
};

enum class FileFormat { kJsonl, kCsv };
std::optional<FileFormat> parse_file_format(std::string_view name);
// Picks csv for a ".csv" extension and jsonl otherwise.
FileFormat guess_format(const std::filesystem::path& path);

// Throws InvalidBio on an I- tag that does not continue a run of the same
// type, MalformedRecord on a tag outside the BIO scheme.
std::vector<GoldSpan> bio_to_spans(std::span<const std::string> tags);
// Throws OverlapError on overlapping spans, MalformedRecord on spans that
// fall outside [0, n).
std::vector<std::string> spans_to_bio(std::size_t n,
                                      std::span<const GoldSpan> spans);

// Checks the NerExample invariants; throws MalformedRecord/OverlapError.
void validate(const NerExample& example);
void validate(const NliRecord& record);

std::vector<NerExample> read_ner(std::istream& in, FileFormat format);
std::vector<NerExample> parse_ner_dataset(const std::filesystem::path& path,
                                          FileFormat format);
std::vector<NliRecord> read_nli(std::istream& in, FileFormat format);
std::vector<NliRecord> parse_nli_dataset(const std::filesystem::path& path,
                                         FileFormat format);

// Line-delimited writers in the canonical record layout.
void write_ner(std::ostream& out, std::span<const NerExample> examples);
void write_nli(std::ostream& out, std::span<const NliRecord> records);
std::string to_json_line(const NerExample& example);
std::string to_json_line(const NliRecord& record);
// Parses one canonical NER record; `line` only feeds error messages.
NerExample ner_from_json_line(std::string_view text, std::size_t line = 0);

// Mean span width in tokens per entity type present in the data.
std::map<EntityType, double> entity_word_stats(
    std::span<const NerExample> examples);

// Splits raw text into word tokens: runs of word characters (with inner
// hyphens or underscores) or single punctuation characters.
std::vector<std::string> split_words(std::string_view text);

}  // namespace legallens::corpus
