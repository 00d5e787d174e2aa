#include "craql/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "craql/minilang.hpp"

namespace craql::runner {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RunnerError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RunnerError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::string escape_value(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_value(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: out += s[i];
    }
  }
  return out;
}

bool is_canonical_integer(std::string_view s) {
  std::string_view digits = s;
  if (!digits.empty() && digits.front() == '-') digits.remove_prefix(1);
  if (digits.empty() || digits.size() > 19) return false;
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  if (digits.size() > 1 && digits.front() == '0') return false;
  if (s == "-0") return false;
  if (digits.size() == 19 && digits > (s.front() == '-' ? "9223372036854775808" : "9223372036854775807")) {
    return false;
  }
  return true;
}

}  // namespace

RunConfig RunConfig::under(const fs::path& root) {
  RunConfig c;
  c.projects_dir = root / "projects";
  c.queries_dir = root / "queries";
  c.properties_dir = root / "properties";
  c.results_dir = root / "results";
  return c;
}

std::vector<std::string> read_list_file(const fs::path& file) {
  std::vector<std::string> names;
  const std::string text = read_file(file);
  for (std::string_view line : split_lines(text)) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) names.emplace_back(line);
  }
  return names;
}

//===----------------------------------------------------------------------===//
// Inputs
//===----------------------------------------------------------------------===//

LoadedProject load_project(const fs::path& dir, const std::string& name) {
  if (!fs::is_directory(dir)) throw RunnerError("project directory not found: " + dir.string());
  LoadedProject loaded;

  std::vector<fs::path> serialized;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (entry.is_regular_file() && file.size() > 9 && file.ends_with(".ast.json")) serialized.push_back(entry.path());
  }
  if (serialized.size() > 1) throw RunnerError("more than one serialized AST in " + dir.string());
  if (!serialized.empty()) {
    loaded.ast = deserialize_project(read_file(serialized.front()), minilang::default_registry());
    for (const SourceFile& f : loaded.ast->files()) {
      if (f.name() != kBuiltinsFileName) ++loaded.files_parsed;
    }
    return loaded;
  }

  std::vector<fs::path> sources;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == minilang::kFileExtension) {
      sources.push_back(fs::relative(entry.path(), dir));
    }
  }
  std::sort(sources.begin(), sources.end());
  std::vector<minilang::SourceInput> inputs;
  for (const fs::path& rel : sources) inputs.push_back({rel.generic_string(), read_file(dir / rel)});

  minilang::BuildOutput built = minilang::build_project(name, std::move(inputs));
  for (const auto& d : built.diagnostics) loaded.diagnostics.push_back(d.to_string());
  loaded.files_parsed = built.files_parsed;
  loaded.ast.emplace(std::move(built.project));
  return loaded;
}

std::vector<LoadedQuery> load_queries(const fs::path& queries_dir, const std::vector<std::string>& names) {
  std::vector<LoadedQuery> queries;
  for (const std::string& name : names) {
    fs::path file = queries_dir / name;
    if (file.extension() != query::kFileExtension) file += query::kFileExtension;
    if (!fs::is_regular_file(file)) throw RunnerError("query file not found: " + file.string());
    queries.push_back({file.stem().string(), query::parse_query_text(read_file(file), file.filename().string())});
  }
  return queries;
}

Properties parse_properties(std::string_view text) {
  Properties props;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    std::string_view content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto eq = content.find('=');
    std::string_view key = eq == std::string_view::npos ? std::string_view() : trim(content.substr(0, eq));
    if (key.empty()) {
      props.warnings.push_back("line " + std::to_string(line_no) + ": expected key=value, got '" +
                               std::string(content) + "'");
      continue;
    }
    std::string value = unescape_value(trim(content.substr(eq + 1)));
    Value v;
    if (is_canonical_integer(value)) {
      v = Value::number(std::stoll(value));
    } else if (value == "true" || value == "false") {
      v = Value::boolean(value == "true");
    } else {
      v = Value::string(value);
    }
    props.values.insert_or_assign(std::string(key), std::move(v));
  }
  return props;
}

Properties load_properties(const fs::path& properties_dir, const std::string& project) {
  fs::path file = properties_dir / (project + ".properties");
  if (!fs::is_regular_file(file)) return {};
  return parse_properties(read_file(file));
}

//===----------------------------------------------------------------------===//
// Execution
//===----------------------------------------------------------------------===//

ProjectRunRecord run_project(const std::string& name, const ProjectAst& project, std::size_t files_parsed,
                             const std::vector<LoadedQuery>& queries, const std::map<std::string, Value>& seed,
                             EvalOptions options) {
  ProjectRunRecord record;
  record.project = name;
  record.stats.files_parsed = files_parsed;

  Environment env;
  for (const auto& [k, v] : seed) env.set(k, v);

  for (const LoadedQuery& q : queries) {
    RunOutput out;
    try {
      Engine(project, env, out, options).execute(q.doc);
    } catch (const RuntimeError& e) {
      record.aborted = true;
      record.diagnostics.push_back(name + ": " + e.what());
    }
    record.printed.insert(record.printed.end(), out.printed.begin(), out.printed.end());
    record.stats.nodes_visited += out.stats.nodes_visited;
    record.stats.rows_yielded += out.stats.rows_yielded;
    record.degraded = record.degraded || out.degraded;
    if (record.aborted) break;
    record.row_counts[q.name] = out.rows.size();
    record.rows[q.name] = std::move(out.rows);
  }

  for (const auto& [k, v] : env.variables) {
    if (k.starts_with("temp_") || v.is_undefined()) continue;
    record.variables[k] = render_value(v, project);
  }
  return record;
}

std::string format_vars(const std::map<std::string, std::string>& variables) {
  std::string out;
  for (const auto& [k, v] : variables) out += k + "=" + escape_value(v) + "\n";
  return out;
}

std::map<std::string, std::string> parse_vars(std::string_view text) {
  std::map<std::string, std::string> vars;
  for (std::string_view line : split_lines(text)) {
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    vars[std::string(line.substr(0, eq))] = unescape_value(line.substr(eq + 1));
  }
  return vars;
}

namespace {

void write_outputs(const RunConfig& config, const ProjectRunRecord& record) {
  const fs::path& dir = config.results_dir;
  for (const auto& [query, rows] : record.rows) {
    std::string text;
    for (const auto& r : rows) text += r + "\n";
    write_file(dir / (record.project + "." + query + ".rows"), text);
  }
  std::string printed;
  for (const auto& line : record.printed) printed += line + "\n";
  write_file(dir / (record.project + ".out"), printed);
  if (!record.aborted) write_file(dir / (record.project + ".vars"), format_vars(record.variables));
}

ProjectRunRecord run_one(const RunConfig& config, const std::string& name, const std::vector<LoadedQuery>& queries) {
  ProjectRunRecord record;
  record.project = name;
  try {
    LoadedProject loaded = load_project(config.projects_dir / name, name);
    Properties props = load_properties(config.properties_dir, name);
    record = run_project(name, *loaded.ast, loaded.files_parsed, queries, props.values,
                         EvalOptions{config.recursion_limit});
    std::vector<std::string> notes = std::move(loaded.diagnostics);
    for (auto& w : props.warnings) notes.push_back(name + ".properties: " + w);
    record.diagnostics.insert(record.diagnostics.begin(), notes.begin(), notes.end());
    if (record.degraded) record.diagnostics.push_back(name + ": source text unavailable, placeholders emitted");
    write_outputs(config, record);
  } catch (const std::exception& e) {
    record.aborted = true;
    record.diagnostics.push_back(name + ": " + e.what());
  }
  return record;
}

}  // namespace

BatchResult run_batch(const RunConfig& config, std::ostream& out, std::ostream& log) {
  for (const fs::path* dir : {&config.projects_dir, &config.queries_dir}) {
    if (!fs::is_directory(*dir)) throw RunnerError("directory not found: " + dir->string());
  }
  std::vector<std::string> projects = read_list_file(config.project_list);
  std::vector<std::string> query_names = read_list_file(config.query_list);
  if (projects.empty()) throw RunnerError("project list is empty: " + config.project_list.string());
  if (query_names.empty()) throw RunnerError("query list is empty: " + config.query_list.string());

  std::vector<LoadedQuery> queries = load_queries(config.queries_dir, query_names);
  auto schema = minilang::schema();
  for (const LoadedQuery& q : queries) {
    for (const auto& w : query::validate_against_schema(q.doc, *schema)) {
      log << q.doc.source << ":" << w.loc.line << ":" << w.loc.column << ": warning: " << w.message << "\n";
    }
  }
  fs::create_directories(config.results_dir);

  BatchResult result;
  result.projects.resize(projects.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < projects.size(); i = next++) {
      result.projects[i] = run_one(config, projects[i], queries);
    }
  };
  std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, projects.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (const ProjectRunRecord& record : result.projects) {
    for (const auto& line : record.printed) out << line << "\n";
    for (const auto& d : record.diagnostics) log << d << "\n";
    if (record.aborted) result.exit_status = 1;
  }
  return result;
}

//===----------------------------------------------------------------------===//
// Spreadsheets
//===----------------------------------------------------------------------===//

std::string csv_quote(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      cell += c;
    }
  }
  if (quoted) throw RunnerError("unterminated quoted CSV cell");
  if (any) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

fs::path collate_csv(const fs::path& results_dir) {
  std::vector<fs::path> files;
  if (fs::is_directory(results_dir)) {
    for (const auto& entry : fs::directory_iterator(results_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".vars") files.push_back(entry.path());
    }
  }
  if (files.empty()) throw RunnerError("no .vars files in " + results_dir.string());
  std::sort(files.begin(), files.end());

  std::vector<std::pair<std::string, std::map<std::string, std::string>>> projects;
  std::set<std::string> columns;
  for (const fs::path& f : files) {
    auto vars = parse_vars(read_file(f));
    for (const auto& [k, v] : vars) columns.insert(k);
    projects.emplace_back(f.stem().string(), std::move(vars));
  }

  std::string csv = "project";
  for (const auto& c : columns) csv += "," + csv_quote(c);
  csv += "\n";
  for (const auto& [name, vars] : projects) {
    csv += csv_quote(name);
    for (const auto& c : columns) {
      csv += ",";
      if (auto it = vars.find(c); it != vars.end()) csv += csv_quote(it->second);
    }
    csv += "\n";
  }
  fs::path out = results_dir / "craql_output.csv";
  write_file(out, csv);
  return out;
}

std::vector<fs::path> generate_props(const fs::path& properties_dir) {
  fs::path tags = properties_dir / "projecttags.csv";
  auto rows = parse_csv(read_file(tags));
  if (rows.empty()) throw RunnerError(tags.string() + " has no header row");
  const auto& header = rows.front();

  std::set<std::string> seen;
  std::vector<fs::path> written;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.empty() || (row.size() == 1 && row[0].empty())) continue;
    const std::string& project = row[0];
    if (project.empty()) throw RunnerError(tags.string() + ": row " + std::to_string(r + 1) + " has no project name");
    if (!seen.insert(project).second) throw RunnerError("duplicate project " + project + " in " + tags.string());
    std::string text;
    for (std::size_t c = 1; c < row.size() && c < header.size(); ++c) {
      if (!row[c].empty()) text += header[c] + "=" + escape_value(row[c]) + "\n";
    }
    fs::path out = properties_dir / (project + ".properties");
    write_file(out, text);
    written.push_back(out);
  }
  return written;
}

}  // namespace craql::runner
