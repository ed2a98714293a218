#include "ueq/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ueq/errors.hpp"

namespace ueq {

namespace {

enum class Tok { Ident, Number, String, Symbol, End };

struct Token {
   Tok kind = Tok::End;
   std::string text;
   SourcePos pos;
};

std::string upper(std::string_view s) {
   std::string out(s);
   std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
   return out;
}

std::vector<Token> lex(std::string_view src) {
   std::vector<Token> toks;
   int line = 1, col = 1;
   std::size_t i = 0;
   auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
         if (src[i] == '\n') {
            ++line;
            col = 1;
         } else {
            ++col;
         }
      }
   };
   while (i < src.size()) {
      char c = src[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
         advance(1);
         continue;
      }
      if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
         while (i < src.size() && src[i] != '\n') advance(1);
         continue;
      }
      Token t;
      t.pos = {line, col};
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
         std::size_t j = i;
         while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
         t.kind = Tok::Ident;
         t.text = std::string(src.substr(i, j - i));
         advance(j - i);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
         std::size_t j = i;
         while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
         t.kind = Tok::Number;
         t.text = std::string(src.substr(i, j - i));
         advance(j - i);
      } else if (c == '\'') {
         std::size_t j = i + 1;
         std::string text;
         while (true) {
            if (j >= src.size()) throw ParseError("unterminated string literal", t.pos);
            if (src[j] == '\'') {
               if (j + 1 < src.size() && src[j + 1] == '\'') {
                  text += '\'';
                  j += 2;
                  continue;
               }
               break;
            }
            text += src[j++];
         }
         t.kind = Tok::String;
         t.text = text;
         advance(j + 1 - i);
      } else {
         static const char* multi[] = {"\xE2\x89\xA1", "==", "<>", "!=", "<=", ">=", "??"};
         t.kind = Tok::Symbol;
         bool matched = false;
         for (const char* m : multi) {
            std::string_view mv(m);
            if (src.substr(i, mv.size()) == mv) {
               t.text = std::string(mv);
               advance(mv.size());
               matched = true;
               break;
            }
         }
         if (!matched) {
            static const std::string singles = "(),;.*=<>+-/:";
            if (singles.find(c) == std::string::npos)
               throw ParseError(std::string("unexpected character '") + c + "'", t.pos);
            t.text = std::string(1, c);
            advance(1);
         }
         if (t.text == "\xE2\x89\xA1") t.text = "==";
      }
      toks.push_back(std::move(t));
   }
   Token end;
   end.kind = Tok::End;
   end.pos = {line, col};
   toks.push_back(end);
   return toks;
}

const std::set<std::string>& reserved() {
   static const std::set<std::string> words = {"SELECT", "FROM",   "WHERE", "GROUP", "BY",   "UNION",
                                               "ALL",    "EXCEPT", "AS",    "AND",   "OR",   "NOT",
                                               "EXISTS", "DISTINCT", "TRUE", "FALSE", "ON", "REFERENCES"};
   return words;
}

bool is_aggregate(const std::string& name) {
   std::string u = upper(name);
   return u == "COUNT" || u == "SUM" || u == "AVG" || u == "MIN" || u == "MAX" || u == "AGG";
}

bool is_cmp(const std::string& s) {
   return s == "=" || s == "<>" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=";
}

class Parser {
 public:
   explicit Parser(std::string_view src) : toks_(lex(src)) {}

   Program program() {
      Program p;
      int verify_count = 0;
      while (!at_end()) {
         if (accept_sym(";")) continue;
         p.statements.push_back(statement(verify_count));
      }
      return p;
   }

   QueryPtr single_query() {
      auto q = query();
      accept_sym(";");
      if (!at_end()) fail("unexpected trailing input");
      return q;
   }

 private:
   std::vector<Token> toks_;
   std::size_t i_ = 0;
   int anonymous_ = 0;

   const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
   bool at_end() const { return peek().kind == Tok::End; }
   [[noreturn]] void fail(const std::string& msg) const {
      const auto& t = peek();
      std::string near = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
      throw ParseError(msg + " near " + near, t.pos);
   }

   bool is_kw(const std::string& kw, std::size_t k = 0) const {
      return peek(k).kind == Tok::Ident && upper(peek(k).text) == kw;
   }
   bool is_sym(const std::string& s, std::size_t k = 0) const {
      return peek(k).kind == Tok::Symbol && peek(k).text == s;
   }
   bool accept_kw(const std::string& kw) {
      if (!is_kw(kw)) return false;
      ++i_;
      return true;
   }
   bool accept_sym(const std::string& s) {
      if (!is_sym(s)) return false;
      ++i_;
      return true;
   }
   void expect_kw(const std::string& kw) {
      if (!accept_kw(kw)) fail("expected " + kw);
   }
   void expect_sym(const std::string& s) {
      if (!accept_sym(s)) fail("expected '" + s + "'");
   }
   std::string ident(const char* what = "identifier") {
      if (peek().kind != Tok::Ident || reserved().count(upper(peek().text))) fail(std::string("expected ") + what);
      return toks_[i_++].text;
   }
   bool at_plain_ident(std::size_t k = 0) const {
      return peek(k).kind == Tok::Ident && !reserved().count(upper(peek(k).text));
   }

   // ---- statements ----

   Statement statement(int& verify_count) {
      SourcePos pos = peek().pos;
      if (accept_kw("SCHEMA")) {
         SchemaStmt s;
         s.pos = pos;
         s.name = ident("schema name");
         expect_sym("(");
         s.columns = column_defs(s.name);
         expect_sym(")");
         expect_sym(";");
         return s;
      }
      if (accept_kw("TABLE")) {
         TableStmt t;
         t.pos = pos;
         t.name = ident("table name");
         expect_sym("(");
         bool is_inline = is_sym("??") || (at_plain_ident() && is_sym(":", 1)) || is_sym(")");
         if (is_inline)
            t.inline_columns = column_defs(t.name);
         else
            t.schema = ident("schema name");
         expect_sym(")");
         expect_sym(";");
         return t;
      }
      if (accept_kw("KEY")) {
         KeyStmt k;
         k.pos = pos;
         k.table = ident("table name");
         k.attrs = name_list();
         expect_sym(";");
         return k;
      }
      if (accept_kw("FOREIGN")) {
         expect_kw("KEY");
         ForeignKeyStmt f;
         f.pos = pos;
         f.table = ident("table name");
         f.attrs = name_list();
         expect_kw("REFERENCES");
         f.target = ident("table name");
         f.target_attrs = name_list();
         expect_sym(";");
         return f;
      }
      if (accept_kw("VIEW")) {
         ViewStmt v;
         v.pos = pos;
         v.name = ident("view name");
         accept_kw("AS");
         v.query = query();
         expect_sym(";");
         return v;
      }
      if (accept_kw("INDEX")) {
         IndexStmt x;
         x.pos = pos;
         x.name = ident("index name");
         expect_kw("ON");
         x.table = ident("table name");
         x.attrs = name_list();
         expect_sym(";");
         return x;
      }
      if (accept_kw("VERIFY")) {
         VerifyStmt v;
         v.pos = pos;
         ++verify_count;
         if (at_plain_ident() && is_sym(":", 1)) {
            v.name = ident();
            expect_sym(":");
         } else {
            v.name = "verify_" + std::to_string(verify_count);
         }
         v.lhs = query();
         if (!accept_sym("==")) accept_sym(",");
         v.rhs = query();
         expect_sym(";");
         return v;
      }
      fail("expected a statement");
   }

   std::vector<Column> column_defs(const std::string& owner) {
      std::vector<Column> cols;
      if (is_sym(")")) return cols;
      do {
         if (accept_sym("??")) {
            Column c;
            c.name = "??";
            c.type = BaseType::Opaque;
            c.opaque_origin = owner;
            cols.push_back(c);
            continue;
         }
         Column c;
         c.name = ident("attribute name");
         expect_sym(":");
         SourcePos tpos = peek().pos;
         std::string tname = ident("type name");
         auto bt = parse_base_type(tname);
         if (!bt) throw ParseError("unknown type '" + tname + "'", tpos);
         c.type = *bt;
         cols.push_back(c);
      } while (accept_sym(","));
      return cols;
   }

   std::vector<std::string> name_list() {
      std::vector<std::string> names;
      expect_sym("(");
      do {
         names.push_back(ident("attribute name"));
      } while (accept_sym(","));
      expect_sym(")");
      return names;
   }

   // ---- queries ----

   QueryPtr query() {
      auto q = query_term();
      while (true) {
         SourcePos pos = peek().pos;
         if (is_kw("UNION")) {
            ++i_;
            expect_kw("ALL");
            auto u = std::make_shared<QueryAst>();
            u->kind = QueryAst::Kind::UnionAll;
            u->pos = pos;
            u->left = q;
            u->right = query_term();
            q = u;
         } else if (accept_kw("EXCEPT")) {
            auto u = std::make_shared<QueryAst>();
            u->kind = QueryAst::Kind::Except;
            u->pos = pos;
            u->left = q;
            u->right = query_term();
            q = u;
         } else {
            return q;
         }
      }
   }

   QueryPtr query_term() {
      SourcePos pos = peek().pos;
      if (accept_sym("(")) {
         auto q = query();
         expect_sym(")");
         return q;
      }
      if (is_kw("SELECT")) return select();
      if (accept_kw("DISTINCT")) {
         auto d = std::make_shared<QueryAst>();
         d->kind = QueryAst::Kind::Distinct;
         d->pos = pos;
         d->left = query_term();
         return d;
      }
      if (at_plain_ident()) return make_table(ident(), pos);
      fail("expected a query");
   }

   QueryPtr select() {
      auto q = std::make_shared<QueryAst>();
      q->kind = QueryAst::Kind::Select;
      q->pos = peek().pos;
      expect_kw("SELECT");
      q->distinct = accept_kw("DISTINCT");
      do {
         q->projections.push_back(projection());
      } while (accept_sym(","));
      expect_kw("FROM");
      do {
         q->from.push_back(from_item());
      } while (accept_sym(","));
      if (accept_kw("WHERE")) q->where = pred();
      if (accept_kw("GROUP")) {
         expect_kw("BY");
         do {
            q->group_by.push_back(scalar());
         } while (accept_sym(","));
      }
      return q;
   }

   Projection projection() {
      Projection p;
      p.pos = peek().pos;
      if (accept_sym("*")) {
         p.kind = Projection::Kind::Star;
         return p;
      }
      if (at_plain_ident() && is_sym(".", 1) && is_sym("*", 2)) {
         p.kind = Projection::Kind::AliasStar;
         p.alias = ident();
         i_ += 2;
         return p;
      }
      p.kind = Projection::Kind::Expr;
      p.expr = scalar();
      if (accept_kw("AS")) p.as = ident("column name");
      return p;
   }

   FromItem from_item() {
      FromItem f;
      f.pos = peek().pos;
      if (is_sym("(")) {
         ++i_;
         f.source = query();
         expect_sym(")");
      } else {
         f.source = make_table(ident("table name"), f.pos);
      }
      bool explicit_as = accept_kw("AS");
      if (at_plain_ident())
         f.alias = ident();
      else if (explicit_as)
         fail("expected alias");
      if (f.alias.empty() && f.source->kind == QueryAst::Kind::Table) f.alias = f.source->table;
      if (f.alias.empty()) f.alias = "_s" + std::to_string(++anonymous_);
      return f;
   }

   // ---- predicates ----

   PredAstPtr pred() {
      auto p = and_pred();
      while (is_kw("OR")) {
         SourcePos pos = peek().pos;
         ++i_;
         auto o = std::make_shared<PredAst>();
         o->kind = PredAst::Kind::Or;
         o->pos = pos;
         o->left = p;
         o->right = and_pred();
         p = o;
      }
      return p;
   }

   PredAstPtr and_pred() {
      auto p = not_pred();
      while (is_kw("AND")) {
         ++i_;
         p = make_and(p, not_pred());
      }
      return p;
   }

   PredAstPtr not_pred() {
      SourcePos pos = peek().pos;
      if (accept_kw("NOT")) {
         auto n = std::make_shared<PredAst>();
         n->kind = PredAst::Kind::Not;
         n->pos = pos;
         n->left = not_pred();
         return n;
      }
      return atom_pred();
   }

   PredAstPtr atom_pred() {
      SourcePos pos = peek().pos;
      if (accept_kw("EXISTS")) {
         auto e = std::make_shared<PredAst>();
         e->kind = PredAst::Kind::Exists;
         e->pos = pos;
         expect_sym("(");
         e->sub = query();
         expect_sym(")");
         return e;
      }
      if ((is_kw("TRUE") || is_kw("FALSE")) && !(peek(1).kind == Tok::Symbol && is_cmp(peek(1).text))) {
         auto c = std::make_shared<PredAst>();
         c->kind = is_kw("TRUE") ? PredAst::Kind::True : PredAst::Kind::False;
         c->pos = pos;
         ++i_;
         return c;
      }
      if (is_sym("(") && !is_kw("SELECT", 1)) {
         std::size_t save = i_;
         try {
            ++i_;
            auto p = pred();
            expect_sym(")");
            if (!(peek().kind == Tok::Symbol && (is_cmp(peek().text) || peek().text == "+" || peek().text == "-" ||
                                                 peek().text == "*" || peek().text == "/")))
               return p;
         } catch (const ParseError&) {
         }
         i_ = save;
      }
      auto lhs = scalar();
      if (!(peek().kind == Tok::Symbol && is_cmp(peek().text))) fail("expected comparison operator");
      std::string op = toks_[i_++].text;
      auto rhs = scalar();
      auto c = make_cmp(op, lhs, rhs);
      c->pos = pos;
      return c;
   }

   // ---- scalars ----

   ScalarAstPtr binary(std::string op, ScalarAstPtr a, ScalarAstPtr b, SourcePos pos) {
      auto f = std::make_shared<ScalarAst>();
      f->kind = ScalarAst::Kind::Func;
      f->name = std::move(op);
      f->args = {std::move(a), std::move(b)};
      f->pos = pos;
      return f;
   }

   ScalarAstPtr scalar() {
      auto s = term();
      while (is_sym("+") || is_sym("-")) {
         SourcePos pos = peek().pos;
         std::string op = toks_[i_++].text;
         s = binary(op, s, term(), pos);
      }
      return s;
   }

   ScalarAstPtr term() {
      auto s = factor();
      while (is_sym("*") || is_sym("/")) {
         SourcePos pos = peek().pos;
         std::string op = toks_[i_++].text;
         s = binary(op, s, factor(), pos);
      }
      return s;
   }

   ScalarAstPtr factor() {
      SourcePos pos = peek().pos;
      auto lit = [&](std::string text, BaseType type) {
         auto c = std::make_shared<ScalarAst>();
         c->kind = ScalarAst::Kind::Const;
         c->literal = std::move(text);
         c->literal_type = type;
         c->pos = pos;
         return c;
      };
      if (peek().kind == Tok::Number) return lit(toks_[i_++].text, BaseType::Int);
      if (is_sym("-") && peek(1).kind == Tok::Number) {
         ++i_;
         return lit("-" + toks_[i_++].text, BaseType::Int);
      }
      if (peek().kind == Tok::String) return lit(toks_[i_++].text, BaseType::String);
      if (is_kw("TRUE") || is_kw("FALSE")) return lit(upper(toks_[i_++].text) == "TRUE" ? "TRUE" : "FALSE", BaseType::Bool);
      if (accept_sym("(")) {
         auto s = scalar();
         expect_sym(")");
         return s;
      }
      if (!at_plain_ident()) fail("expected an expression");
      std::string name = ident();
      if (accept_sym("(")) {
         auto f = std::make_shared<ScalarAst>();
         f->pos = pos;
         if (is_aggregate(name)) {
            f->kind = ScalarAst::Kind::Agg;
            f->name = upper(name);
            std::transform(f->name.begin(), f->name.end(), f->name.begin(), [](unsigned char c) { return std::tolower(c); });
            if (accept_sym("*")) {
               f->star = true;
            } else if (is_kw("SELECT") || (is_sym("(") && is_kw("SELECT", 1))) {
               f->sub = query();
            } else {
               f->args.push_back(scalar());
            }
            expect_sym(")");
            return f;
         }
         f->kind = ScalarAst::Kind::Func;
         f->name = name;
         if (!is_sym(")")) {
            do {
               f->args.push_back(scalar());
            } while (accept_sym(","));
         }
         expect_sym(")");
         return f;
      }
      if (accept_sym(".")) return make_attr(name, ident("attribute name"), pos);
      return make_attr("", name, pos);
   }
};

} // namespace

Program parse_program(std::string_view source) {
   return Parser(source).program();
}

QueryPtr parse_query(std::string_view source) {
   return Parser(source).single_query();
}

} // namespace ueq
