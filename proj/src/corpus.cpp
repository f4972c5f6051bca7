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

#include "legallens/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legallens/errors.hpp"

namespace legallens::corpus {

using nlohmann::json;

namespace {

std::string normalize_key(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '-') {
      key.push_back('_');
    } else {
      key.push_back(static_cast<char>(
          std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return key;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         (static_cast<unsigned char>(c) & 0x80) != 0;
}

struct ParsedTag {
  char prefix;  // 'B', 'I' or 'O'
  EntityType type;
};

ParsedTag parse_tag(std::string_view tag) {
  if (tag == "O") return {'O', EntityType::kLaw};
  if (tag.size() < 3 || (tag[0] != 'B' && tag[0] != 'I') ||
      (tag[1] != '-' && tag[1] != '_')) {
    throw MalformedRecord("unknown tag '" + std::string(tag) + "'");
  }
  auto type = parse_entity_type(tag.substr(2));
  if (!type) {
    throw MalformedRecord("unknown entity type in tag '" + std::string(tag) +
                          "'");
  }
  return {tag[0], *type};
}

std::vector<std::string> string_array(const json& value, const char* field) {
  if (!value.is_array()) {
    throw MalformedRecord(std::string("field '") + field +
                          "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw MalformedRecord(std::string("field '") + field +
                            "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string id_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw MalformedRecord("field 'id' must be a string or integer");
}

NerExample make_ner(std::string id, std::vector<std::string> tokens,
                    const std::vector<std::string>& tags) {
  if (tokens.size() != tags.size()) {
    throw MalformedRecord("token/tag length mismatch (" +
                          std::to_string(tokens.size()) + " tokens, " +
                          std::to_string(tags.size()) + " tags)");
  }
  NerExample example{std::move(id), std::move(tokens), bio_to_spans(tags)};
  validate(example);
  return example;
}

const json& require(const json& object, const char* field) {
  auto it = object.find(field);
  if (it == object.end()) {
    throw MalformedRecord(std::string("missing field '") + field + "'");
  }
  return *it;
}

std::string require_string(const json& object, const char* field) {
  const json& value = require(object, field);
  if (!value.is_string()) {
    throw MalformedRecord(std::string("field '") + field +
                          "' must be a string");
  }
  return value.get<std::string>();
}

NliRecord make_nli(std::string id, std::string premise, std::string hypothesis,
                   std::string_view label, std::string_view domain) {
  auto parsed_label = parse_label(label);
  if (!parsed_label) {
    throw MalformedRecord("unknown label '" + std::string(label) + "'");
  }
  auto parsed_domain = parse_domain(domain);
  if (!parsed_domain) {
    throw MalformedRecord("unknown legal_act '" + std::string(domain) + "'");
  }
  NliRecord record{std::move(id), std::move(premise), std::move(hypothesis),
                   *parsed_label, *parsed_domain, std::nullopt};
  validate(record);
  return record;
}

NliRecord nli_from_json(const json& object, std::size_t line) {
  std::string id = object.contains("id") ? id_string(object.at("id"))
                                         : "nli-" + std::to_string(line);
  NliRecord record =
      make_nli(std::move(id), require_string(object, "premise"),
               require_string(object, "hypothesis"),
               require_string(object, "label"),
               require_string(object, "legal_act"));
  if (auto it = object.find("provenance"); it != object.end()) {
    if (!it->is_object()) throw MalformedRecord("'provenance' must be object");
    record.provenance = Provenance{it->value("source_id", ""),
                                   it->value("prompt_name", ""),
                                   it->value("model_name", "")};
  }
  return record;
}

// A CSV cell holding a list: either a JSON array or whitespace-separated.
std::vector<std::string> list_cell(const std::string& cell, const char* field) {
  auto first = cell.find_first_not_of(" \t");
  if (first != std::string::npos && cell[first] == '[') {
    json parsed = json::parse(cell, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      throw MalformedRecord(std::string("field '") + field +
                            "' is not a valid JSON array");
    }
    return string_array(parsed, field);
  }
  std::vector<std::string> out;
  std::istringstream words(cell);
  for (std::string w; words >> w;) out.push_back(w);
  return out;
}

// RFC 4180 row: quoted cells may contain commas and doubled quotes.
std::vector<std::string> csv_row(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back().push_back(c);
    }
  }
  if (quoted) throw MalformedRecord("unterminated quoted CSV cell");
  return cells;
}

template <typename Record, typename FromJson, typename FromCsv>
std::vector<Record> read_lines(std::istream& in, FileFormat format,
                               FromJson from_json, FromCsv from_csv) {
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      if (format == FileFormat::kJsonl) {
        json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (object.is_discarded() || !object.is_object()) {
          throw MalformedRecord("not a JSON object");
        }
        records.push_back(from_json(object, line_no));
      } else {
        auto cells = csv_row(line);
        if (header.empty()) {
          header = std::move(cells);
          continue;
        }
        if (cells.size() != header.size()) {
          throw MalformedRecord("expected " + std::to_string(header.size()) +
                                " columns, found " +
                                std::to_string(cells.size()));
        }
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) {
          row[lower(header[i])] = cells[i];
        }
        records.push_back(from_csv(row, line_no));
      }
    } catch (const MalformedRecord& e) {
      if (e.line() != 0) throw;
      throw MalformedRecord(line_no, e.what());
    } catch (const DataError& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
  return records;
}

const std::string& column(const std::map<std::string, std::string>& row,
                          const char* name) {
  auto it = row.find(name);
  if (it == row.end()) {
    throw MalformedRecord(std::string("missing column '") + name + "'");
  }
  return it->second;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view canonical_name(EntityType type) {
  switch (type) {
    case EntityType::kLaw: return "LAW";
    case EntityType::kViolatedBy: return "VIOLATED_BY";
    case EntityType::kViolatedOn: return "VIOLATED_ON";
    case EntityType::kViolation: return "VIOLATION";
  }
  return "";
}

std::string_view display_name(EntityType type) {
  switch (type) {
    case EntityType::kLaw: return "LAW";
    case EntityType::kViolatedBy: return "VIOLATED BY";
    case EntityType::kViolatedOn: return "VIOLATED ON";
    case EntityType::kViolation: return "VIOLATION";
  }
  return "";
}

std::optional<EntityType> parse_entity_type(std::string_view name) {
  const std::string key = normalize_key(name);
  for (EntityType type : kEntityTypes) {
    if (key == canonical_name(type)) return type;
  }
  return std::nullopt;
}

std::string_view label_name(NliLabel label) {
  switch (label) {
    case NliLabel::kEntailed: return "Entailed";
    case NliLabel::kContradict: return "Contradict";
    case NliLabel::kNeutral: return "Neutral";
  }
  return "";
}

std::string_view domain_name(Domain domain) {
  switch (domain) {
    case Domain::kConsumerProtection: return "consumer_protection";
    case Domain::kPrivacy: return "privacy";
    case Domain::kTcpa: return "tcpa";
    case Domain::kWage: return "wage";
  }
  return "";
}

std::string_view domain_title(Domain domain) {
  switch (domain) {
    case Domain::kConsumerProtection: return "Consumer Protection";
    case Domain::kPrivacy: return "Privacy";
    case Domain::kTcpa: return "TCPA";
    case Domain::kWage: return "Wage";
  }
  return "";
}

std::optional<NliLabel> parse_label(std::string_view name) {
  const std::string key = lower(name);
  for (NliLabel label : kNliLabels) {
    if (key == lower(label_name(label))) return label;
  }
  return std::nullopt;
}

std::optional<Domain> parse_domain(std::string_view name) {
  std::string key = lower(name);
  std::replace(key.begin(), key.end(), ' ', '_');
  for (Domain domain : kDomains) {
    if (key == domain_name(domain)) return domain;
  }
  return std::nullopt;
}

std::optional<FileFormat> parse_file_format(std::string_view name) {
  const std::string key = lower(name);
  if (key == "jsonl" || key == "json") return FileFormat::kJsonl;
  if (key == "csv") return FileFormat::kCsv;
  return std::nullopt;
}

FileFormat guess_format(const std::filesystem::path& path) {
  return lower(path.extension().string()) == ".csv" ? FileFormat::kCsv
                                                     : FileFormat::kJsonl;
}

std::vector<GoldSpan> bio_to_spans(std::span<const std::string> tags) {
  std::vector<GoldSpan> spans;
  std::optional<GoldSpan> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ParsedTag tag = parse_tag(tags[i]);
    if (tag.prefix == 'I') {
      if (!open || open->entity_type != tag.type) {
        throw InvalidBio("orphan tag '" + tags[i] + "' at position " +
                         std::to_string(i));
      }
      open->end = i;
      continue;
    }
    if (open) spans.push_back(*open);
    open.reset();
    if (tag.prefix == 'B') open = GoldSpan{tag.type, i, i};
  }
  if (open) spans.push_back(*open);
  return spans;
}

std::vector<std::string> spans_to_bio(std::size_t n,
                                      std::span<const GoldSpan> spans) {
  std::vector<std::string> tags(n, "O");
  std::vector<bool> used(n, false);
  for (const GoldSpan& span : spans) {
    if (span.start > span.end || span.end >= n) {
      throw MalformedRecord("span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) +
                            "] outside sentence of " + std::to_string(n) +
                            " tokens");
    }
    for (std::size_t i = span.start; i <= span.end; ++i) {
      if (used[i]) {
        throw OverlapError("spans overlap at token " + std::to_string(i));
      }
      used[i] = true;
      tags[i] = std::string(i == span.start ? "B-" : "I-") +
                std::string(canonical_name(span.entity_type));
    }
  }
  return tags;
}

void validate(const NerExample& example) {
  spans_to_bio(example.tokens.size(), example.entities);
}

void validate(const NliRecord& record) {
  if (record.premise.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw MalformedRecord("empty premise");
  }
  if (record.hypothesis.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw MalformedRecord("empty hypothesis");
  }
}

NerExample ner_from_json_line(std::string_view text, std::size_t line) {
  json object = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (object.is_discarded() || !object.is_object()) {
    throw MalformedRecord(line, "not a JSON object");
  }
  try {
    return make_ner(object.contains("id") ? id_string(object.at("id"))
                                          : "ner-" + std::to_string(line),
                    string_array(require(object, "tokens"), "tokens"),
                    string_array(require(object, "ner_tags"), "ner_tags"));
  } catch (const MalformedRecord& e) {
    if (line == 0) throw;
    throw MalformedRecord(line, e.what());
  }
}

std::vector<NerExample> read_ner(std::istream& in, FileFormat format) {
  return read_lines<NerExample>(
      in, format,
      [](const json& object, std::size_t line) {
        return make_ner(object.contains("id") ? id_string(object.at("id"))
                                              : "ner-" + std::to_string(line),
                        string_array(require(object, "tokens"), "tokens"),
                        string_array(require(object, "ner_tags"), "ner_tags"));
      },
      [](const std::map<std::string, std::string>& row, std::size_t) {
        return make_ner(column(row, "id"),
                        list_cell(column(row, "tokens"), "tokens"),
                        list_cell(column(row, "ner_tags"), "ner_tags"));
      });
}

std::vector<NerExample> parse_ner_dataset(const std::filesystem::path& path,
                                          FileFormat format) {
  auto in = open_input(path);
  return read_ner(in, format);
}

std::vector<NliRecord> read_nli(std::istream& in, FileFormat format) {
  return read_lines<NliRecord>(
      in, format, nli_from_json,
      [](const std::map<std::string, std::string>& row, std::size_t line) {
        auto id = row.find("id");
        return make_nli(
            id != row.end() ? id->second : "nli-" + std::to_string(line),
            column(row, "premise"), column(row, "hypothesis"),
            column(row, "label"), column(row, "legal_act"));
      });
}

std::vector<NliRecord> parse_nli_dataset(const std::filesystem::path& path,
                                         FileFormat format) {
  auto in = open_input(path);
  return read_nli(in, format);
}

std::string to_json_line(const NerExample& example) {
  json object = {{"id", example.id},
                 {"tokens", example.tokens},
                 {"ner_tags", spans_to_bio(example.tokens.size(),
                                           example.entities)}};
  return object.dump();
}

std::string to_json_line(const NliRecord& record) {
  json object = {{"id", record.id},
                 {"premise", record.premise},
                 {"hypothesis", record.hypothesis},
                 {"label", label_name(record.label)},
                 {"legal_act", domain_name(record.domain)}};
  if (record.provenance) {
    object["provenance"] = {{"source_id", record.provenance->source_id},
                            {"prompt_name", record.provenance->prompt_name},
                            {"model_name", record.provenance->model_name}};
  }
  return object.dump();
}

void write_ner(std::ostream& out, std::span<const NerExample> examples) {
  for (const auto& example : examples) out << to_json_line(example) << '\n';
}

void write_nli(std::ostream& out, std::span<const NliRecord> records) {
  for (const auto& record : records) out << to_json_line(record) << '\n';
}

std::map<EntityType, double> entity_word_stats(
    std::span<const NerExample> examples) {
  if (examples.empty()) throw EmptyDataset("no examples");
  std::map<EntityType, std::pair<double, std::size_t>> sums;
  for (const auto& example : examples) {
    for (const auto& span : example.entities) {
      auto& [total, count] = sums[span.entity_type];
      total += static_cast<double>(span.width());
      ++count;
    }
  }
  std::map<EntityType, double> means;
  for (const auto& [type, acc] : sums) {
    means[type] = acc.first / static_cast<double>(acc.second);
  }
  return means;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_word_char(text[i])) {
      while (i < text.size() && is_word_char(text[i])) ++i;
      while (i + 1 < text.size() && (text[i] == '-' || text[i] == '_') &&
             is_word_char(text[i + 1])) {
        ++i;
        while (i < text.size() && is_word_char(text[i])) ++i;
      }
    } else {
      ++i;
    }
    words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace legallens::corpus
