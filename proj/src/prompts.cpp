#include "csdial/prompts.hpp"

#include "csdial/text.hpp"

namespace csdial::prompts {

const std::vector<Exemplar>& naturalize_exemplars() {
  static const std::vector<Exemplar> kExemplars = {
      {"PersonX bakes a cake\n"
       "↪ PersonX wanted: to celebrate a birthday\n"
       "↪ As a result, PersonX feels: proud",
       "A: I baked a cake this afternoon.\n"
       "B: Oh nice, is it for a birthday?\n"
       "A: Yes, and I'm really proud of how it turned out."},
      {"PersonX loses PersonX's keys\n"
       "↪ As a result, PersonX feels: frustrated\n"
       "↪ Before that, PersonX needed: to leave the house\n"
       "↪ As a result, PersonX wants: to find them",
       "A: I lost my keys again.\n"
       "B: That must be so frustrating.\n"
       "A: It is, and I was just about to leave the house.\n"
       "B: Let's look around together so you can find them."},
      {"PersonX adopts a dog\n"
       "↪ PersonX is seen as: caring\n"
       "↪ PersonX wanted: to have a companion\n"
       "↪ Before that, PersonX needed: to visit the shelter\n"
       "↪ As a result, PersonX will: goes for walks every day",
       "A: I adopted a dog last weekend!\n"
       "B: That's so caring of you.\n"
       "A: Thanks, I really wanted a companion.\n"
       "B: Did you find him at the shelter?\n"
       "A: Yes, and now I go for walks every day."},
      {"PersonX fails the exam\n"
       "↪ As a result, PersonX feels: disappointed\n"
       "↪ As a result, PersonX wants: to study harder",
       "A: I failed the exam today.\n"
       "B: Oh no, you must be disappointed.\n"
       "A: I am, but I want to study harder for the next one."},
      {"PersonX moves to a new city\n"
       "↪ As a result, PersonX feels: nervous\n"
       "↪ Before that, PersonX needed: to pack everything\n"
       "↪ PersonX wanted: a fresh start\n"
       "↪ As a result, PersonX wants: to make new friends\n"
       "↪ PersonX is seen as: brave",
       "A: I'm moving to a new city next month.\n"
       "B: You must be nervous about it.\n"
       "A: A little, and I still need to pack everything.\n"
       "B: I guess you wanted a fresh start.\n"
       "A: Exactly, and I want to make lots of new friends there.\n"
       "B: That's really brave of you."},
      {"PersonX burns the toast\n"
       "↪ As a result, PersonX will: opens a window\n"
       "↪ PersonX is seen as: careless\n"
       "↪ As a result, PersonX feels: embarrassed",
       "A: I burned the toast again.\n"
       "B: Open a window, the smoke is everywhere.\n"
       "A: I know, that was careless of me.\n"
       "B: Don't be embarrassed, it happens to everyone."},
      {"PersonX wins the race\n"
       "↪ Before that, PersonX needed: to train for months\n"
       "↪ As a result, PersonX feels: thrilled\n"
       "↪ PersonX is seen as: athletic\n"
       "↪ As a result, PersonX will: receives a medal\n"
       "↪ PersonX wanted: to beat PersonX's personal best\n"
       "↪ As a result, PersonX wants: to celebrate with friends",
       "A: I won the race this morning!\n"
       "B: All those months of training paid off.\n"
       "A: I'm so thrilled right now.\n"
       "B: You've always been so athletic.\n"
       "A: They even gave me a medal.\n"
       "B: And you beat your personal best, right?\n"
       "A: I did! Now I want to celebrate with my friends."},
      {"PersonX forgets PersonY's birthday\n"
       "↪ As a result, others feel: hurt\n"
       "↪ PersonX is seen as: forgetful\n"
       "↪ As a result, PersonX feels: guilty\n"
       "↪ As a result, PersonX wants: to make it up to PersonY\n"
       "↪ As a result, others want: an apology\n"
       "↪ Before that, PersonX needed: to be busy at work\n"
       "↪ As a result, PersonX will: buys a gift",
       "A: I completely forgot your birthday yesterday.\n"
       "B: Honestly, I was a little hurt.\n"
       "A: I'm sorry, I've been so forgetful lately.\n"
       "B: You look like you feel guilty about it.\n"
       "A: I do, and I want to make it up to you.\n"
       "B: An apology would be a good start.\n"
       "A: I'm sorry. Work has kept me so busy.\n"
       "B: Well, a gift wouldn't hurt either."},
      {"PersonX helps PersonY move\n"
       "↪ As a result, others feel: grateful\n"
       "↪ As a result, PersonX feels: tired",
       "A: I helped you move all your boxes today.\n"
       "B: I'm so grateful, thank you.\n"
       "A: No problem, but I'm really tired now."},
      {"PersonX learns to cook\n"
       "↪ PersonX wanted: to eat healthier\n"
       "↪ Before that, PersonX needed: to buy some pans\n"
       "↪ As a result, PersonX will: makes dinner every night\n"
       "↪ PersonX is seen as: independent",
       "A: I've been learning to cook.\n"
       "B: Are you trying to eat healthier?\n"
       "A: Yes, so I bought some new pans.\n"
       "B: So you make dinner every night now?\n"
       "A: I do. It feels good to be more independent."},
      {"PersonX gets a promotion\n"
       "↪ As a result, PersonX feels: proud\n"
       "↪ PersonX is seen as: hardworking\n"
       "↪ As a result, others want: to congratulate PersonX\n"
       "↪ As a result, PersonX will: earns more money\n"
       "↪ As a result, PersonX wants: to take a vacation",
       "A: I got a promotion at work!\n"
       "B: You must be so proud.\n"
       "A: I am. I've been working really hard.\n"
       "B: Congratulations! I'm so happy for you.\n"
       "A: Thanks, and I'll be earning more money too.\n"
       "B: You should take a vacation to celebrate."},
      {"PersonX misses the bus\n"
       "↪ As a result, PersonX feels: annoyed\n"
       "↪ As a result, PersonX will: arrives late\n"
       "↪ As a result, PersonX wants: to call a taxi",
       "A: I just missed the bus.\n"
       "B: That's so annoying.\n"
       "A: Now I'm going to arrive late.\n"
       "B: Why don't you call a taxi?"},
      {"PersonX plants a garden\n"
       "↪ PersonX wanted: to grow vegetables\n"
       "↪ Before that, PersonX needed: to buy seeds\n"
       "↪ PersonX is seen as: patient\n"
       "↪ As a result, PersonX will: waters the plants\n"
       "↪ As a result, PersonX feels: relaxed\n"
       "↪ As a result, others want: some tomatoes",
       "A: I planted a garden in the backyard.\n"
       "B: Are you going to grow vegetables?\n"
       "A: Yes, I bought a bunch of seeds yesterday.\n"
       "B: You have to be patient with gardening.\n"
       "A: I know, I water the plants every morning.\n"
       "B: It sounds relaxing.\n"
       "A: It is, and you can have some tomatoes when they're ready."},
      {"PersonX throws a party\n"
       "↪ PersonX wanted: to celebrate graduating\n"
       "↪ Before that, PersonX needed: to send invitations\n"
       "↪ PersonX is seen as: outgoing\n"
       "↪ As a result, others feel: excited\n"
       "↪ As a result, PersonX will: cleans up afterwards\n"
       "↪ As a result, PersonX feels: happy\n"
       "↪ As a result, others want: to dance",
       "A: I'm throwing a party on Saturday.\n"
       "B: Is it to celebrate your graduation?\n"
       "A: Yes! I already sent out the invitations.\n"
       "B: You're always so outgoing.\n"
       "A: Everyone seems really excited about it.\n"
       "B: Just don't forget you'll have to clean up afterwards.\n"
       "A: I don't mind, I'm just happy to have everyone over.\n"
       "B: I can't wait to dance."},
      {"PersonX breaks PersonX's phone\n"
       "↪ As a result, PersonX feels: upset\n"
       "↪ As a result, PersonX wants: to get a new one\n"
       "↪ Before that, PersonX needed: to drop it\n"
       "↪ As a result, PersonX will: saves money",
       "A: I broke my phone this morning.\n"
       "B: You must be so upset.\n"
       "A: I am. I want to get a new one right away.\n"
       "B: How did it happen? Did you drop it?\n"
       "A: Yes, so now I have to save money for a new one."},
  };
  return kExemplars;
}

std::string_view naturalize_instruction() {
  return "Turn each commonsense template into a casual text message conversation between two people, A and B. "
         "A opens the conversation by saying the first line of the template in the first person. Every following "
         "template line becomes exactly one more turn, and the speakers alternate. Write one turn per line, "
         "starting with 'A:' or 'B:'.";
}

std::string_view negate_instruction() {
  return "You are given a conversation and its final response. Rewrite the final response so that it means the "
         "semantic opposite and no longer follows from the conversation. Keep the topic and the casual style.";
}

std::string_view rephrase_instruction() {
  return "Rephrase the following text message. Keep its meaning exactly, but use different wording.";
}

std::string_view feedback_instruction() {
  return "You are shown a synthetic dialogue written by an AI. The dialogue is intended to sound like a natural "
         "text message conversation between two people. The AI is imperfect and makes mistakes. You are asked to "
         "provide feedback to the AI to improve its dialogue generation. You are given a few dialogue turns, "
         "followed by a Baseline Response. Please give 1-2 sentences of feedback for the baseline response, and "
         "please be specific!";
}

std::string_view improve_direct_instruction() {
  return "You will be given a dialogue context and a baseline response. Your job is to improve that baseline "
         "response. Always write the improved response last and prefix it with 'Improved Response:'";
}

std::string_view improve_with_feedback_instruction() {
  return "You will be given a dialogue context, a baseline response, and a critique of that baseline response. "
         "Your job is to improve that baseline response so that it addresses the critique. Always write the "
         "improved response last and prefix it with 'Improved Response:'";
}

namespace {
// Prompt fields are single-line so the labelled layout stays parseable.
std::string one_line(std::string_view s) { return text::normalize_space(s); }
}  // namespace

std::string render_context(const std::vector<ContextTurn>& turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i) out += '\n';
    out += turns[i].speaker;
    out += ": ";
    out += one_line(turns[i].text);
  }
  return out;
}

std::string naturalize_prompt(std::string_view rendered_template) {
  std::string out(naturalize_instruction());
  out += "\n\n";
  for (const auto& ex : naturalize_exemplars()) {
    out += kTemplateLabel;
    out += '\n';
    out += ex.rendered_template;
    out += '\n';
    out += kDialogueLabel;
    out += '\n';
    out += ex.dialogue;
    out += "\n\n";
  }
  out += kTemplateLabel;
  out += '\n';
  out += rendered_template;
  out += '\n';
  out += kDialogueLabel;
  out += '\n';
  return out;
}

std::string negate_prompt(std::string_view context, std::string_view response) {
  std::string out(negate_instruction());
  out += "\n\n";
  out += kContextLabel;
  out += '\n';
  out += context;
  out += '\n';
  out += kResponseLabel;
  out += one_line(response);
  out += '\n';
  out += kOppositeCue;
  return out;
}

std::string rephrase_prompt(std::string_view response) {
  std::string out(rephrase_instruction());
  out += "\n\n";
  out += kTextLabel;
  out += one_line(response);
  out += '\n';
  out += kRephraseCue;
  return out;
}

std::string feedback_prompt(std::string_view context, std::string_view invalid_response) {
  std::string out(feedback_instruction());
  out += "\n\n";
  out += kContextLabel;
  out += '\n';
  out += context;
  out += '\n';
  out += kBaselineLabel;
  out += one_line(invalid_response);
  out += kFeedbackCue;
  return out;
}

std::string improve_prompt(std::string_view context, std::string_view baseline,
                           std::optional<std::string_view> feedback) {
  std::string out(feedback ? improve_with_feedback_instruction() : improve_direct_instruction());
  out += "\n\n";
  out += kContextLabel;
  out += '\n';
  out += context;
  out += '\n';
  out += kBaselineLabel;
  out += one_line(baseline);
  if (feedback) {
    out += '\n';
    out += kFeedbackLabel;
    out += one_line(*feedback);
  }
  out += kImprovedCue;
  return out;
}

std::optional<std::string> last_field(std::string_view prompt, std::string_view label) {
  std::optional<std::string> found;
  for (const auto& line : text::split_lines(prompt))
    if (line.starts_with(label)) found = std::string(text::trim(std::string_view(line).substr(label.size())));
  return found;
}

std::string strip_label(std::string_view output, std::string_view label) {
  auto pos = output.rfind(label);
  if (pos != std::string_view::npos) output = output.substr(pos + label.size());
  return std::string(text::trim(output));
}

}  // namespace csdial::prompts
