// Writes every distinct terminal tic-tac-toe board reachable with x moving
// first, labelled by whether x completed a line. Output: CSV + schema JSON.
#include <array>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace {

using Board = std::array<char, 9>;

constexpr std::array<std::array<int, 3>, 8> kLines{{
    {0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6}, {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6},
}};

constexpr std::array<const char*, 9> kSquares{
    "top_left", "top_middle", "top_right", "middle_left", "middle_middle",
    "middle_right", "bottom_left", "bottom_middle", "bottom_right",
};

bool wins(const Board& b, char p) {
  for (const auto& l : kLines) {
    if (b[l[0]] == p && b[l[1]] == p && b[l[2]] == p) return true;
  }
  return false;
}

void play(Board& b, char turn, int filled, std::set<Board>& out) {
  if (wins(b, 'x') || wins(b, 'o') || filled == 9) {
    out.insert(b);
    return;
  }
  for (int i = 0; i < 9; ++i) {
    if (b[i] != 'b') continue;
    b[i] = turn;
    play(b, turn == 'x' ? 'o' : 'x', filled + 1, out);
    b[i] = 'b';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the tic-tac-toe endgame dataset"};
  std::string csv_path = "tictactoe.csv";
  std::string schema_path = "tictactoe.schema.json";
  app.add_option("--csv", csv_path, "Output CSV");
  app.add_option("--schema", schema_path, "Output schema JSON");
  CLI11_PARSE(app, argc, argv);

  Board start;
  start.fill('b');
  std::set<Board> boards;
  play(start, 'x', 0, boards);

  std::ofstream csv(csv_path);
  if (!csv) {
    std::cerr << "cannot write " << csv_path << "\n";
    return 1;
  }
  for (const char* s : kSquares) csv << s << ',';
  csv << "class\n";
  std::size_t positives = 0;
  for (const auto& b : boards) {
    for (char c : b) csv << c << ',';
    const bool x_won = wins(b, 'x');
    positives += x_won;
    csv << (x_won ? "positive" : "negative") << '\n';
  }

  nlohmann::json schema;
  schema["attributes"] = nlohmann::json::array();
  for (const char* s : kSquares) {
    schema["attributes"].push_back({{"name", s}, {"kind", "categorical"}, {"levels", {"x", "o", "b"}}});
  }
  schema["label_column"] = "class";
  schema["positive_label"] = "positive";
  std::ofstream(schema_path) << schema.dump(2) << '\n';
  std::cout << boards.size() << " boards, " << positives << " positive\n";
  return 0;
}
