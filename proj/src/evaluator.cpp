#include "sheetaudit/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace sheetaudit {

CellValue CellValue::number(double v) {
    CellValue c;
    c.data_ = v;
    return c;
}

CellValue CellValue::text(std::string v) {
    CellValue c;
    c.data_ = std::move(v);
    return c;
}

CellValue CellValue::date(Date d) {
    CellValue c;
    c.data_ = d;
    return c;
}

CellValue CellValue::error(ErrorKind e) {
    CellValue c;
    c.data_ = e;
    return c;
}

ValueKind CellValue::kind() const {
    switch (data_.index()) {
    case 1: return ValueKind::Number;
    case 2: return ValueKind::Text;
    case 3: return ValueKind::Date;
    case 4: return ValueKind::Error;
    default: return ValueKind::Blank;
    }
}

bool CellValue::is_numeric() const { return kind() == ValueKind::Number || kind() == ValueKind::Date; }

double CellValue::numeric() const {
    return kind() == ValueKind::Date ? to_serial(as_date()) : as_number();
}

std::string error_code(ErrorKind e) {
    switch (e) {
    case ErrorKind::Div0: return "#DIV/0!";
    case ErrorKind::Cycle: return "#CYCLE!";
    case ErrorKind::UnknownFunction: return "#NAME?";
    case ErrorKind::BrokenRef: return "#REF!";
    case ErrorKind::Type: return "#VALUE!";
    }
    return "#VALUE!";
}

const CellValue& EvalResult::at(const CellAddress& addr) const {
    static const CellValue kBlank;
    auto it = values_.find(addr.location());
    return it == values_.end() ? kBlank : it->second;
}

void EvalResult::set(const CellAddress& addr, CellValue v) { values_[addr.location()] = std::move(v); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Interpreter {
public:
    Interpreter(const Workbook& wb, const EvalResult& values, const std::string& host)
        : wb_(wb), values_(values), host_(host) {}

    CellValue eval(const Expr& e) {
        return std::visit(
            overloaded{
                [](const NumberLit& x) { return CellValue::number(x.value); },
                [](const TextLit& x) { return CellValue::text(x.value); },
                [](const DateLit& x) { return CellValue::date(x.value); },
                [&](const CellRef& x) { return lookup(x.addr); },
                [](const RangeRef&) { return CellValue::error(ErrorKind::Type); },
                [](const BrokenRef&) { return CellValue::error(ErrorKind::BrokenRef); },
                [&](const Call& x) { return call(x); },
                [&](const Unary& x) {
                    CellValue v = as_number(eval(*x.operand));
                    return v.is_error() ? v : CellValue::number(-v.as_number());
                },
                [&](const Binary& x) { return binary(x); },
            },
            e.node);
    }

private:
    bool sheet_exists(const CellAddress& a) const { return a.sheet.empty() || wb_.find_sheet(a.sheet); }

    CellValue lookup(const CellAddress& ref) {
        if (!sheet_exists(ref))
            return CellValue::error(ErrorKind::BrokenRef);
        return values_.at(resolve(ref, host_));
    }

    static CellValue as_number(const CellValue& v) {
        switch (v.kind()) {
        case ValueKind::Blank: return CellValue::number(0.0);
        case ValueKind::Number: return v;
        case ValueKind::Date: return CellValue::number(v.numeric());
        case ValueKind::Text: return CellValue::error(ErrorKind::Type);
        case ValueKind::Error: return v;
        }
        return v;
    }

    static CellValue finite_or_error(double r) {
        return std::isfinite(r) ? CellValue::number(r) : CellValue::error(ErrorKind::Type);
    }

    CellValue binary(const Binary& x) {
        CellValue l = as_number(eval(*x.lhs));
        CellValue r = as_number(eval(*x.rhs));
        if (l.is_error())
            return l;
        if (r.is_error())
            return r;
        double a = l.as_number(), b = r.as_number();
        switch (x.op) {
        case BinaryOp::Add: return finite_or_error(a + b);
        case BinaryOp::Sub: return finite_or_error(a - b);
        case BinaryOp::Mul: return finite_or_error(a * b);
        case BinaryOp::Div:
            if (b == 0.0)
                return CellValue::error(ErrorKind::Div0);
            return finite_or_error(a / b);
        case BinaryOp::Pow:
            if (a == 0.0 && b < 0.0)
                return CellValue::error(ErrorKind::Div0);
            return finite_or_error(std::pow(a, b));
        }
        return CellValue::error(ErrorKind::Type);
    }

    // Values an aggregate sees for one argument. Ranges and bare references
    // contribute cell values as stored; other arguments their computed value.
    struct Item {
        CellValue value;
        bool from_cell;
    };

    bool collect(const Expr& arg, std::vector<Item>& items) {
        if (const auto* r = std::get_if<RangeRef>(&arg.node)) {
            if (!sheet_exists(r->first))
                return false;
            for (const auto& a : expand_range(resolve(r->first, host_), resolve(r->last, host_)))
                items.push_back({values_.at(a), true});
            return true;
        }
        if (const auto* c = std::get_if<CellRef>(&arg.node)) {
            if (!sheet_exists(c->addr))
                return false;
            items.push_back({lookup(c->addr), true});
            return true;
        }
        items.push_back({eval(arg), false});
        return true;
    }

    CellValue call(const Call& x) {
        if (!is_known_function(x.name))
            return CellValue::error(ErrorKind::UnknownFunction);
        if (x.name == "IF")
            return if_call(x);

        std::vector<Item> items;
        for (const auto& a : x.args)
            if (!collect(*a, items))
                return CellValue::error(ErrorKind::BrokenRef);

        if (x.name == "COUNT") {
            double n = 0;
            for (const auto& it : items)
                if (it.value.is_numeric())
                    ++n;
            return CellValue::number(n);
        }

        std::vector<double> nums;
        for (const auto& it : items) {
            const CellValue& v = it.value;
            if (v.is_error())
                return v;
            if (v.is_numeric())
                nums.push_back(v.numeric());
            else if (!it.from_cell) {
                if (v.kind() == ValueKind::Text)
                    return CellValue::error(ErrorKind::Type);
                nums.push_back(0.0);
            }
        }
        if (x.name == "SUM" || x.name == "AVERAGE") {
            double s = 0.0;
            for (double d : nums)
                s += d;
            if (x.name == "SUM")
                return finite_or_error(s);
            if (nums.empty())
                return CellValue::error(ErrorKind::Div0);
            return finite_or_error(s / static_cast<double>(nums.size()));
        }
        if (nums.empty())
            return CellValue::number(0.0);
        double m = nums.front();
        for (double d : nums)
            m = x.name == "MIN" ? std::min(m, d) : std::max(m, d);
        return CellValue::number(m);
    }

    CellValue if_call(const Call& x) {
        if (x.args.size() < 2 || x.args.size() > 3)
            return CellValue::error(ErrorKind::Type);
        CellValue cond = eval(*x.args[0]);
        bool truth = false;
        switch (cond.kind()) {
        case ValueKind::Error: return cond;
        case ValueKind::Text: return CellValue::error(ErrorKind::Type);
        case ValueKind::Blank: truth = false; break;
        case ValueKind::Number:
        case ValueKind::Date: truth = cond.numeric() != 0.0; break;
        }
        if (truth)
            return eval(*x.args[1]);
        if (x.args.size() == 3)
            return eval(*x.args[2]);
        return CellValue::number(0.0);
    }

    const Workbook& wb_;
    const EvalResult& values_;
    const std::string& host_;
};

CellValue constant_value(const CellContent& c) {
    switch (c.kind()) {
    case CellKind::Number: return CellValue::number(c.as_number());
    case CellKind::Text: return CellValue::text(c.as_text());
    case CellKind::Date: return CellValue::date(c.as_date().date);
    default: return CellValue::blank();
    }
}

}  // namespace

EvalResult evaluate(const Workbook& wb) { return evaluate(wb, DepGraph::build(wb)); }

EvalResult evaluate(const Workbook& wb, const DepGraph& graph) {
    EvalResult result;
    for (const auto& sheet : wb.sheets())
        for (const auto& [pos, cell] : sheet.cells())
            if (cell.content.kind() != CellKind::Formula && !cell.content.empty())
                result.set(sheet.address(pos), constant_value(cell.content));

    TopoResult topo = topo_order(graph);
    for (const auto& cycle : topo.cycles)
        for (const auto& a : cycle)
            result.set(a, CellValue::error(ErrorKind::Cycle));

    for (const auto& addr : topo.order) {
        const Cell* cell = wb.cell(addr);
        if (!cell || cell->content.kind() != CellKind::Formula)
            continue;
        ExprPtr ast = cell->content.ast();
        if (!ast) {
            result.set(addr, CellValue::error(ErrorKind::Type));
            continue;
        }
        CellValue v = Interpreter(wb, result, addr.sheet).eval(*ast);
        if (v.kind() == ValueKind::Blank)
            v = CellValue::number(0.0);
        result.set(addr, std::move(v));
    }
    return result;
}

std::string format_fixed(double v, int decimals) {
    if (!std::isfinite(v))
        return format_number(v);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.14e", std::fabs(v));
    std::string digits;
    digits += buf[0];
    digits.append(buf + 2, buf + 16);
    int exponent = std::atoi(buf + 17);
    int keep = exponent + 1 + decimals;

    std::string n;
    if (keep <= 0) {
        n = keep == 0 && digits[0] >= '5' ? "1" : "0";
    } else if (keep >= static_cast<int>(digits.size())) {
        n = digits + std::string(static_cast<std::size_t>(keep) - digits.size(), '0');
    } else {
        n = digits.substr(0, static_cast<std::size_t>(keep));
        if (digits[static_cast<std::size_t>(keep)] >= '5') {
            int i = static_cast<int>(n.size()) - 1;
            while (i >= 0 && n[static_cast<std::size_t>(i)] == '9')
                n[static_cast<std::size_t>(i--)] = '0';
            if (i < 0)
                n.insert(n.begin(), '1');
            else
                ++n[static_cast<std::size_t>(i)];
        }
    }
    if (n.size() < static_cast<std::size_t>(decimals) + 1)
        n.insert(0, static_cast<std::size_t>(decimals) + 1 - n.size(), '0');
    bool zero = n.find_first_not_of('0') == std::string::npos;
    std::string out = (v < 0 && !zero) ? "-" : "";
    std::size_t int_len = n.size() - static_cast<std::size_t>(decimals);
    out += n.substr(0, int_len);
    if (decimals > 0)
        out += "." + n.substr(int_len);
    return out;
}

std::string display(const CellValue& v, const CellMeta& meta) {
    switch (v.kind()) {
    case ValueKind::Blank: return "";
    case ValueKind::Number:
        return meta.display_decimals ? format_fixed(v.as_number(), *meta.display_decimals)
                                     : format_number(v.as_number());
    case ValueKind::Text: return v.as_text();
    case ValueKind::Date: return to_dmy(v.as_date());
    case ValueKind::Error: return error_code(v.as_error());
    }
    return "";
}

}  // namespace sheetaudit
