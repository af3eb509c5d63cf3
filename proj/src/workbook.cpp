#include "sheetaudit/workbook.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sheetaudit {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CellContent

CellContent CellContent::number(double v) {
    CellContent c;
    c.data_ = v;
    return c;
}

CellContent CellContent::text(std::string v) {
    CellContent c;
    c.data_ = TextValue{std::move(v)};
    return c;
}

CellContent CellContent::date(Date d, std::string source) {
    CellContent c;
    c.data_ = DateValue{d, std::move(source)};
    return c;
}

CellContent CellContent::formula(std::string source) {
    CellContent c;
    ParseResult parsed = parse_formula(source);
    c.data_ = FormulaValue{std::move(source), std::move(parsed)};
    return c;
}

namespace {

std::optional<double> parse_decimal(std::string_view s) {
    if (s.empty())
        return std::nullopt;
    if (s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    char first = s.front() == '-' && s.size() > 1 ? s[1] : s.front();
    if (!(first >= '0' && first <= '9') && first != '.')
        return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

}  // namespace

CellContent CellContent::from_entry(std::string_view entry, int pivot) {
    if (entry.empty())
        return {};
    if (entry.front() == '=')
        return formula(std::string(entry));
    if (entry.front() == '\'')
        return text(std::string(entry.substr(1)));
    if (auto v = parse_decimal(entry))
        return number(*v);
    if (looks_like_date(entry)) {
        try {
            return date(parse_date(entry, pivot), std::string(entry));
        } catch (const DateError&) {
            // calendar-invalid dates stay text
        }
    }
    return text(std::string(entry));
}

CellKind CellContent::kind() const {
    switch (data_.index()) {
    case 1: return CellKind::Number;
    case 2: return CellKind::Text;
    case 3: return CellKind::Date;
    case 4: return CellKind::Formula;
    default: return CellKind::Empty;
    }
}

ExprPtr CellContent::ast() const {
    if (const auto* f = std::get_if<FormulaValue>(&data_))
        if (const auto* p = std::get_if<ExprPtr>(&f->parsed))
            return *p;
    return nullptr;
}

const SyntaxError* CellContent::syntax_error() const {
    if (const auto* f = std::get_if<FormulaValue>(&data_))
        return std::get_if<SyntaxError>(&f->parsed);
    return nullptr;
}

std::string CellContent::entry_text() const {
    switch (kind()) {
    case CellKind::Empty: return "";
    case CellKind::Number: return format_number(as_number());
    case CellKind::Date: return as_date().source;
    case CellKind::Formula: return as_formula().source;
    case CellKind::Text: {
        const std::string& t = as_text();
        CellContent reread = from_entry(t);
        if (reread.kind() == CellKind::Text && reread.as_text() == t)
            return t;
        return "'" + t;
    }
    }
    return "";
}

bool CellContent::operator==(const CellContent& other) const {
    if (kind() != other.kind())
        return false;
    switch (kind()) {
    case CellKind::Empty: return true;
    case CellKind::Number: return as_number() == other.as_number();
    case CellKind::Text: return as_text() == other.as_text();
    case CellKind::Date: return as_date().date == other.as_date().date && as_date().source == other.as_date().source;
    case CellKind::Formula: return as_formula().source == other.as_formula().source;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Sheet / Workbook

const Cell* Sheet::find(int col, int row) const {
    auto it = cells_.find({row, col});
    return it == cells_.end() ? nullptr : &it->second;
}

void Sheet::set(int col, int row, Cell cell) {
    if (!is_valid_position(col, row))
        throw AddressError("cell position out of range: " + column_letters(col) + std::to_string(row));
    if (cell.content.empty())
        cells_.erase({row, col});
    else
        cells_[{row, col}] = std::move(cell);
}

void Sheet::erase(int col, int row) { cells_.erase({row, col}); }

int Sheet::max_row() const { return cells_.empty() ? 0 : cells_.rbegin()->first.row; }

int Sheet::max_col() const {
    int m = 0;
    for (const auto& [pos, _] : cells_)
        m = std::max(m, pos.col);
    return m;
}

Sheet& Workbook::add_sheet(std::string name) {
    if (name.empty())
        throw LoadError("sheet name must not be empty");
    if (find_sheet(name))
        throw LoadError("duplicate sheet name '" + name + "'");
    sheets_.emplace_back(std::move(name));
    return sheets_.back();
}

const Sheet* Workbook::find_sheet(std::string_view name) const {
    for (const auto& s : sheets_)
        if (s.name() == name)
            return &s;
    return nullptr;
}

Sheet* Workbook::find_sheet(std::string_view name) {
    for (auto& s : sheets_)
        if (s.name() == name)
            return &s;
    return nullptr;
}

int Workbook::sheet_index(std::string_view name) const {
    for (std::size_t i = 0; i < sheets_.size(); ++i)
        if (sheets_[i].name() == name)
            return static_cast<int>(i);
    return -1;
}

const Cell* Workbook::cell(const CellAddress& addr) const {
    const Sheet* s = find_sheet(addr.sheet);
    return s ? s->find(addr.col, addr.row) : nullptr;
}

void Workbook::set_cell(const CellAddress& addr, Cell cell) {
    Sheet* s = find_sheet(addr.sheet);
    if (!s)
        s = &add_sheet(addr.sheet);
    s->set(addr.col, addr.row, std::move(cell));
}

void Workbook::erase_cell(const CellAddress& addr) {
    if (Sheet* s = find_sheet(addr.sheet))
        s->erase(addr.col, addr.row);
}

// ---------------------------------------------------------------------------
// Loading

namespace {

Workbook load_grid(std::string_view bytes, const LoadOptions& opts) {
    Workbook wb;
    Sheet& sheet = wb.add_sheet(opts.grid_sheet_name);
    int row = 1;
    std::size_t start = 0;
    while (start <= bytes.size()) {
        std::size_t nl = bytes.find('\n', start);
        std::string_view line = bytes.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        int col = 1;
        std::size_t cs = 0;
        while (true) {
            std::size_t tab = line.find('\t', cs);
            std::string_view entry = line.substr(cs, tab == std::string_view::npos ? std::string_view::npos : tab - cs);
            if (!entry.empty()) {
                if (!is_valid_position(col, row))
                    throw LoadError("line " + std::to_string(row) + ": cell beyond sheet bounds");
                sheet.set(col, row, Cell{CellContent::from_entry(entry, opts.pivot_year), {}});
            }
            if (tab == std::string_view::npos)
                break;
            cs = tab + 1;
            ++col;
        }
        if (nl == std::string_view::npos)
            break;
        start = nl + 1;
        ++row;
    }
    return wb;
}

Workbook load_json(std::string_view bytes, const LoadOptions& opts) {
    // The parser keeps one value per repeated key; track keys per object to
    // reject repeats instead of silently dropping cells.
    std::vector<std::set<std::string>> open_objects;
    std::optional<std::string> repeated;
    auto track_keys = [&](int, ordered_json::parse_event_t event, ordered_json& parsed) {
        using Event = ordered_json::parse_event_t;
        if (event == Event::object_start)
            open_objects.emplace_back();
        else if (event == Event::object_end && !open_objects.empty())
            open_objects.pop_back();
        else if (event == Event::key && !open_objects.back().insert(parsed.get<std::string>()).second && !repeated)
            repeated = parsed.get<std::string>();
        return true;
    };
    ordered_json doc;
    try {
        doc = ordered_json::parse(bytes.begin(), bytes.end(), track_keys);
    } catch (const nlohmann::json::parse_error& e) {
        throw LoadError(std::string("malformed JSON: ") + e.what());
    }
    if (repeated)
        throw LoadError("duplicate key '" + *repeated + "'");
    if (!doc.is_object() || !doc.contains("sheets") || !doc["sheets"].is_array())
        throw LoadError("workbook JSON must be an object with a \"sheets\" array");

    Workbook wb;
    for (const auto& js : doc["sheets"]) {
        if (!js.is_object() || !js.contains("name") || !js["name"].is_string())
            throw LoadError("every sheet needs a string \"name\"");
        std::string name = js["name"].get<std::string>();
        Sheet& sheet = wb.add_sheet(name);
        if (!js.contains("cells"))
            continue;
        if (!js["cells"].is_object())
            throw LoadError("sheet '" + name + "': \"cells\" must be an object");
        for (const auto& [key, jc] : js["cells"].items()) {
            auto where = "sheet '" + name + "' cell '" + key + "': ";
            CellAddress addr;
            try {
                addr = parse_a1(key);
            } catch (const AddressError& e) {
                throw LoadError(where + e.what());
            }
            if (!addr.sheet.empty() || addr.col_absolute || addr.row_absolute)
                throw LoadError(where + "cell keys must be plain A1 addresses");
            if (!jc.is_object())
                throw LoadError(where + "cell must be an object");
            bool has_v = jc.contains("v"), has_f = jc.contains("f");
            if (has_v == has_f)
                throw LoadError(where + "exactly one of \"v\" or \"f\" is required");
            Cell cell;
            if (has_f) {
                if (!jc["f"].is_string() || jc["f"].get<std::string>().rfind('=', 0) != 0)
                    throw LoadError(where + "\"f\" must be a string starting with '='");
                cell.content = CellContent::formula(jc["f"].get<std::string>());
            } else if (jc["v"].is_number()) {
                cell.content = CellContent::number(jc["v"].get<double>());
            } else if (jc["v"].is_string()) {
                std::string s = jc["v"].get<std::string>();
                if (!s.empty() && s.front() == '\'')
                    cell.content = CellContent::text(s.substr(1));
                else if (looks_like_date(s)) {
                    try {
                        cell.content = CellContent::date(parse_date(s, opts.pivot_year), s);
                    } catch (const DateError&) {
                        cell.content = CellContent::text(s);
                    }
                } else {
                    cell.content = CellContent::text(s);
                }
            } else {
                throw LoadError(where + "\"v\" must be a number or string");
            }
            if (jc.contains("fmt")) {
                if (!jc["fmt"].is_number_integer())
                    throw LoadError(where + "\"fmt\" must be an integer");
                int fmt = jc["fmt"].get<int>();
                if (fmt < 0 || fmt > 15)
                    throw LoadError(where + "\"fmt\" must be in [0, 15]");
                cell.meta.display_decimals = fmt;
            }
            if (jc.contains("updated")) {
                if (!jc["updated"].is_string())
                    throw LoadError(where + "\"updated\" must be a YYYY-MM-DD string");
                try {
                    cell.meta.last_updated = parse_iso_date(jc["updated"].get<std::string>());
                } catch (const DateError& e) {
                    throw LoadError(where + e.what());
                }
            }
            if (sheet.find(addr.col, addr.row))
                throw LoadError(where + "duplicate cell key");
            sheet.set(addr.col, addr.row, std::move(cell));
        }
    }
    return wb;
}

}  // namespace

Workbook load_workbook(std::string_view bytes, WorkbookFormat format, const LoadOptions& opts) {
    return format == WorkbookFormat::Json ? load_json(bytes, opts) : load_grid(bytes, opts);
}

Workbook load_workbook_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw LoadError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    try {
        return load_workbook(buf.str(), json ? WorkbookFormat::Json : WorkbookFormat::Grid, opts);
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    }
}

std::string save_workbook_json(const Workbook& wb) {
    ordered_json sheets = ordered_json::array();
    for (const auto& sheet : wb.sheets()) {
        ordered_json cells = ordered_json::object();
        for (const auto& [pos, cell] : sheet.cells()) {
            ordered_json jc = ordered_json::object();
            const CellContent& c = cell.content;
            switch (c.kind()) {
            case CellKind::Number: jc["v"] = c.as_number(); break;
            case CellKind::Date: jc["v"] = c.as_date().source; break;
            case CellKind::Formula: jc["f"] = c.as_formula().source; break;
            case CellKind::Text: {
                const std::string& t = c.as_text();
                bool escape = (!t.empty() && t.front() == '\'') || looks_like_date(t);
                jc["v"] = escape ? "'" + t : t;
                break;
            }
            case CellKind::Empty: continue;
            }
            if (cell.meta.display_decimals)
                jc["fmt"] = *cell.meta.display_decimals;
            if (cell.meta.last_updated)
                jc["updated"] = to_iso(*cell.meta.last_updated);
            cells[column_letters(pos.col) + std::to_string(pos.row)] = std::move(jc);
        }
        sheets.push_back({{"name", sheet.name()}, {"cells", std::move(cells)}});
    }
    ordered_json doc;
    doc["sheets"] = std::move(sheets);
    return doc.dump(2) + "\n";
}

}  // namespace sheetaudit
