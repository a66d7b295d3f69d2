#include "archivist/expr.hpp"

#include "archivist/errors.hpp"
#include "archivist/model.hpp"

#include <charconv>
#include <cmath>

namespace archivist {

bool is_valid_path_expr(std::string_view text) {
    std::size_t slash = text.find('/');
    std::string_view rule = (slash == std::string_view::npos) ? text : text.substr(0, slash);
    if (!is_valid_rule_name(rule)) {
        return false;
    }
    if (slash == std::string_view::npos) {
        return true;
    }
    std::string_view pointer = text.substr(slash + 1);
    if (pointer.empty()) {
        return false;
    }
    std::size_t start = 0;
    while (true) {
        std::size_t next = pointer.find('/', start);
        std::string_view segment = (next == std::string_view::npos)
                                       ? pointer.substr(start)
                                       : pointer.substr(start, next - start);
        if (segment.empty()) {
            return false;
        }
        if (next == std::string_view::npos) {
            return true;
        }
        start = next + 1;
    }
}

struct ComputeExpr::Node {
    enum class Kind { Number, Reference, Binary };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string reference;
    char op = 0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ComputeExpr::Node>;

class ExprParser {
public:
    ExprParser(std::string_view text, std::vector<std::string>& references)
        : text_(text), references_(references) {}

    NodePtr parse() {
        NodePtr root = parse_expr();
        skip_spaces();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& why) {
        throw ComputeError("expression \"" + std::string(text_) + "\": " + why + " at offset " +
                           std::to_string(pos_));
    }

    void skip_spaces() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool eat(char c) {
        skip_spaces();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            skip_spaces();
            if (pos_ >= text_.size() || (text_[pos_] != '+' && text_[pos_] != '-')) {
                return lhs;
            }
            char op = text_[pos_++];
            lhs = binary(op, std::move(lhs), parse_term());
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        while (true) {
            skip_spaces();
            if (pos_ >= text_.size() || (text_[pos_] != '*' && text_[pos_] != '/')) {
                return lhs;
            }
            char op = text_[pos_++];
            lhs = binary(op, std::move(lhs), parse_factor());
        }
    }

    NodePtr parse_factor() {
        skip_spaces();
        if (pos_ >= text_.size()) {
            fail("expected number, reference, or parenthesized expression");
        }
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!eat(')')) {
                fail("expected ')'");
            }
            return inner;
        }
        if (c == '$') {
            if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '{') {
                fail("expected '{' after '$'");
            }
            std::size_t close = text_.find('}', pos_ + 2);
            if (close == std::string_view::npos) {
                fail("unterminated reference");
            }
            std::string path(text_.substr(pos_ + 2, close - pos_ - 2));
            if (!is_valid_path_expr(path)) {
                fail("invalid fragment path \"" + path + "\"");
            }
            pos_ = close + 1;
            references_.push_back(path);
            auto node = std::make_shared<ComputeExpr::Node>();
            node->kind = ComputeExpr::Node::Kind::Reference;
            node->reference = std::move(path);
            return node;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(),
                                             value);
            if (ec != std::errc() || ptr == text_.data() + pos_) {
                fail("malformed number");
            }
            pos_ = static_cast<std::size_t>(ptr - text_.data());
            auto node = std::make_shared<ComputeExpr::Node>();
            node->kind = ComputeExpr::Node::Kind::Number;
            node->number = value;
            return node;
        }
        fail("expected number, reference, or parenthesized expression");
    }

    static NodePtr binary(char op, NodePtr lhs, NodePtr rhs) {
        auto node = std::make_shared<ComputeExpr::Node>();
        node->kind = ComputeExpr::Node::Kind::Binary;
        node->op = op;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    std::string_view text_;
    std::vector<std::string>& references_;
    std::size_t pos_ = 0;
};

double eval_node(const ComputeExpr::Node& node, const PathResolver& resolve,
                 const std::string& expr_text) {
    switch (node.kind) {
    case ComputeExpr::Node::Kind::Number:
        return node.number;
    case ComputeExpr::Node::Kind::Reference: {
        const Value* v = resolve(node.reference);
        if (v == nullptr) {
            throw MissingSourceError("unresolved reference \"" + node.reference +
                                     "\" in expression \"" + expr_text + "\"");
        }
        if (!is_numeric(*v)) {
            throw ComputeError("reference \"" + node.reference + "\" in expression \"" +
                               expr_text + "\" is not numeric");
        }
        return as_double(*v);
    }
    case ComputeExpr::Node::Kind::Binary: {
        double lhs = eval_node(*node.lhs, resolve, expr_text);
        double rhs = eval_node(*node.rhs, resolve, expr_text);
        switch (node.op) {
        case '+':
            return lhs + rhs;
        case '-':
            return lhs - rhs;
        case '*':
            return lhs * rhs;
        case '/':
            if (rhs == 0.0) {
                throw ComputeError("division by zero in expression \"" + expr_text + "\"");
            }
            return lhs / rhs;
        default:
            break;
        }
        break;
    }
    }
    throw ComputeError("corrupt expression tree");
}

} // namespace

ComputeExpr ComputeExpr::parse(std::string_view text) {
    ComputeExpr expr;
    expr.text_ = std::string(text);
    ExprParser parser(text, expr.references_);
    expr.root_ = parser.parse();
    return expr;
}

double ComputeExpr::evaluate(const PathResolver& resolve) const {
    double result = eval_node(*root_, resolve, text_);
    if (!std::isfinite(result)) {
        throw ComputeError("non-finite result of expression \"" + text_ + "\"");
    }
    return result;
}

} // namespace archivist
