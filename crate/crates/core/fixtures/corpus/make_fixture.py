"""Writes the synthetic 30-transcript corpus fixture.

Composition (input order: NPR file first, then MediaSum):
  keyword rejects      NPR-101, NPR-102, CNN-203
  dedup rejects        the MediaSum copies of NPR-103 and NPR-104
  middle-speaker       CNN-204 (third speaker inside window), CNN-206 (3 utterances),
                       CNN-207 and CNN-208 (panels)
  length rejects       NPR-109 (10 utterances), CNN-209 (10 utterances)
  gate rejects         NPR-108 (call-in), CNN-211 (debate)
  kept                 17, including NPR-110 and CNN-210 at 11 utterances and
                       CNN-205 with a third speaker outside the window
"""
import csv
import json

TOPICS = [
    ("the harbor dredging project", "The dredging will deepen the channel by six feet", "Work starts in April and runs two seasons"),
    ("the new library branch", "The branch will open with forty computers", "Funding came from a county bond"),
    ("the orchard harvest", "Frost cut the apple crop by a third", "Growers are replanting hardier varieties"),
    ("the hospital merger", "The two hospitals will share one board", "No nurses will lose their jobs this year"),
    ("the transit strike", "Drivers want a four percent raise", "Talks resume on Monday morning"),
    ("the wildfire recovery", "Nine hundred homes were lost", "Rebuilding permits are now free"),
    ("the robotics team", "The students built the robot in six weeks", "They placed second at the state finals"),
    ("the jazz festival", "Attendance doubled from last summer", "Most acts were local musicians"),
    ("the river cleanup", "Volunteers removed twelve tons of trash", "The city will add new trash traps"),
    ("the bakery expansion", "The bakery is hiring twenty people", "A second oven line arrives in May"),
]


def interview(n, topic, host="HOST", guest="GUEST", first_speaker=None):
    subject, fact_a, fact_b = topic
    lines = []
    facts = [fact_a, fact_b, f"People have strong feelings about {subject}", "We learned a lot along the way"]
    for i in range(n):
        if i % 2 == 0:
            q = [f"What is the latest on {subject}?", "How did that come about?", "What happens next?",
                 "Who does this affect most?", "Why does it matter now?"][(i // 2) % 5]
            lines.append((host, q))
        else:
            lines.append((guest, facts[(i // 2) % len(facts)] + "."))
    if first_speaker:
        lines[0] = (first_speaker, f"Coming up, a conversation about {subject}.")
    return lines


npr = []   # (episode, title, program, date, lines)
mediasum = []

npr.append(("101", "Sunday Puzzle: Four-Letter Words", "Weekend Edition", "2010-01-03", interview(14, TOPICS[0])))
npr.append(("102", "Commentary: Why I Walk", "All Things Considered", "2010-01-04", interview(14, TOPICS[1])))
for k, ep in enumerate(["103", "104", "105", "106", "107"]):
    npr.append((ep, f"Talking About {TOPICS[k + 2][0].title()}", "Morning Edition", f"2010-02-0{k + 1}", interview(16, TOPICS[k + 2])))
callin = interview(14, TOPICS[7])
callin[4] = ("HOST", "Our next caller is on the line. Go ahead?")
npr.append(("108", "Open Phones", "Talk of the Nation", "2010-03-01", callin))
npr.append(("109", "Brief Chat", "Morning Edition", "2010-03-02", interview(10, TOPICS[8])))
npr.append(("110", "Short Chat", "Morning Edition", "2010-03-03", interview(11, TOPICS[9])))


def ms(mid, program, title, lines):
    mediasum.append({"id": mid, "program": program, "title": title, "date": "2012-05-01",
                     "speaker": [s for s, _ in lines], "utt": [t for _, t in lines]})


ms("NPR-103", "Morning Edition", "Talking About The Orchard Harvest", interview(16, TOPICS[2]))
ms("NPR-104", "Morning Edition", "Talking About The Hospital Merger", interview(16, TOPICS[3]))
ms("CNN-203", "Sponsor Spotlight", "", interview(14, TOPICS[4]))
inside = interview(20, TOPICS[5])
inside[10] = ("ANALYST", "I would add one point here.")
ms("CNN-204", "CNN Newsroom", "Fire Season", inside)
ms("CNN-205", "CNN Newsroom", "Robots", interview(20, TOPICS[6], first_speaker="ANCHOR"))
ms("CNN-206", "CNN Newsroom", "Headlines", interview(3, TOPICS[7]))
for mid, t in [("CNN-207", TOPICS[8]), ("CNN-208", TOPICS[9])]:
    lines = interview(16, t)
    lines = [(["HOST", "GUEST", "PANELIST A", "PANELIST B"][i % 4], txt) for i, (_, txt) in enumerate(lines)]
    ms(mid, "State of the Union", "Roundup", lines)
ms("CNN-209", "CNN Newsroom", "Quick Take", interview(10, TOPICS[0]))
ms("CNN-210", "CNN Newsroom", "Quick Hit", interview(11, TOPICS[1]))
debate = interview(14, TOPICS[2])
debate[2] = ("HOST", "Tonight's debate continues. What is your rebuttal?")
ms("CNN-211", "Crossfire", "Harvest Debate", debate)
for j, mid in enumerate(["CNN-212", "CNN-213", "CNN-214", "CNN-215", "CNN-216", "CNN-217", "CNN-218", "CNN-219", "CNN-220"]):
    ms(mid, "CNN Newsroom", f"Interview {j + 1}", interview(12 + 2 * j, TOPICS[j % len(TOPICS)]))

assert len(npr) + len(mediasum) == 30, len(npr) + len(mediasum)

with open("utterances.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["episode", "episode_order", "speaker", "utterance"])
    for ep, _, _, _, lines in npr:
        for i, (s, t) in enumerate(lines):
            w.writerow([ep, i + 1, s, t])
with open("episodes.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["id", "program", "title", "episode_date"])
    for ep, title, program, date, _ in npr:
        w.writerow([ep, program, title, date])
with open("mediasum.json", "w") as f:
    json.dump(mediasum, f, indent=1)
    f.write("\n")
