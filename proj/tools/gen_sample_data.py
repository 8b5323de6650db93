#!/usr/bin/env python3
"""Regenerates the bundled sample data under data/.

prompts_sample.jsonl  synthetic community-style prompts with nsfw scores
modifiers.tsv         phrase<TAB>category modifier list

Output is deterministic for a given --seed.
"""

import argparse
import json
import random
from pathlib import Path

SUBJECTS = [
    "a lion resting on a rock", "portrait of a young woman", "an old lighthouse", "a castle on a hill",
    "a red fox in the snow", "a futuristic city skyline", "a bowl of fruit", "a samurai in the rain",
    "a cozy cabin in the woods", "a dragon flying over mountains", "a cat sleeping on a windowsill",
    "an astronaut on the moon", "a sailing ship in a storm", "a forest spirit", "a robot gardener",
    "a busy market street", "a mountain lake at dawn", "a knight in shining armor", "a steampunk airship",
    "a field of sunflowers", "a girl with an umbrella", "a wizard reading a book", "a tiger in the jungle",
    "an abandoned train station", "a village by the sea", "a whale in the clouds", "an owl on a branch",
    "a desert caravan", "a cherry blossom garden", "a neon noodle bar", "a bear fishing in a river",
    "a giant tree house", "a floating island", "a vintage car on a highway", "a cup of coffee",
    "a ballerina on stage", "a medieval tavern", "a polar bear on an iceberg", "a temple in the mountains",
    "a deer in a misty forest",
]

STYLE_FAMILIES = {
    "studio ghibli": ["studio ghibli style", "anime-inspired", "soft lighting", "pastel colors",
                      "by Hayao Miyazaki", "whimsical", "hand-drawn", "breathtaking scenery"],
    "cyberpunk": ["cyberpunk", "neon lights", "blade runner style", "rain-soaked streets", "synthwave",
                  "high contrast", "by Syd Mead", "dystopian"],
    "oil painting": ["oil on canvas", "impasto", "by Rembrandt", "chiaroscuro", "classical painting",
                     "rich textures", "museum quality", "warm tones"],
    "watercolor": ["watercolor", "soft washes", "paper texture", "loose brushwork", "by John Singer Sargent",
                   "delicate", "bleeding colors", "light and airy"],
    "art nouveau": ["art nouveau", "by Alphonse Mucha", "ornate borders", "flowing lines", "decorative",
                    "gold leaf", "elegant", "poster art"],
    "fantasy concept art": ["concept art", "fantasy", "by Greg Rutkowski", "epic composition", "matte painting",
                            "dramatic lighting", "highly detailed", "artstation"],
    "photography": ["photograph", "35mm film", "bokeh", "golden hour", "sharp focus", "depth of field",
                    "award winning photo", "natural light"],
    "low poly": ["low poly", "isometric", "3d render", "blender", "pastel palette", "minimalist",
                 "clean shapes", "soft shadows"],
    "ukiyo-e": ["ukiyo-e", "woodblock print", "by Hokusai", "flat colors", "japanese art", "bold outlines",
                "edo period", "textured paper"],
    "surrealism": ["surrealism", "by Salvador Dali", "dreamlike", "melting forms", "by Rene Magritte",
                   "strange perspective", "uncanny", "vivid colors"],
}

GENERIC = [
    "trending on artstation", "intricate details", "8k", "highly detailed", "sharp focus", "cinematic lighting",
    "unreal engine", "octane render", "masterpiece", "volumetric lighting", "digital painting", "smooth",
    "vibrant colors", "wide angle", "ultra realistic", "illustration",
]

LIGHTING = ["soft", "dramatic", "cinematic", "volumetric", "rim", "studio", "natural", "moody", "golden",
            "neon", "ambient", "harsh", "diffuse", "backlit", "candle", "moonlit", "foggy", "warm", "cold",
            "dappled"]
ADJECTIVES = [
    "intricate", "ornate", "minimal", "vivid", "muted", "pastel", "ethereal", "gritty", "dreamy", "luminous",
    "moody", "serene", "chaotic", "elegant", "rustic", "whimsical", "haunting", "majestic", "delicate", "bold",
    "hazy", "crisp", "glowing", "weathered", "surreal", "cozy", "epic", "gloomy", "radiant", "stylized",
    "textured", "faded", "iridescent", "shimmering", "somber", "playful", "regal", "rugged", "tranquil",
    "vibrant", "cinematic", "painterly", "graphic", "organic", "geometric", "nostalgic", "futuristic",
    "ancient", "celestial", "botanical",
]
NOUNS = [
    "colors", "palette", "details", "textures", "atmosphere", "composition", "shadows", "highlights",
    "brushwork", "linework", "patterns", "scenery", "landscape", "portrait", "background", "foreground",
    "reflections", "clouds", "light", "mood", "tones", "gradients", "silhouettes", "ornaments", "forms",
    "shapes", "sky", "fog", "water", "foliage", "architecture", "fabric", "skin tones", "eyes", "hair",
    "costume", "interior", "streets", "ruins", "horizon",
]

FIRST = ["Anna", "Marco", "Yuki", "Lena", "Oskar", "Ines", "Tomas", "Mira", "Felix", "Sana", "Elio", "Nora",
         "Pavel", "Aiko", "Jonas", "Clara", "Rafael", "Ida", "Kenji", "Leila"]
LAST = ["Varga", "Lindqvist", "Moreau", "Okafor", "Brandt", "Castell", "Nakamura", "Petrov", "Halloran",
        "Ferreira", "Kowalski", "Idris", "Marchetti", "Sorensen", "Vale", "Arden", "Quint", "Renn", "Tamsin",
        "Wexley"]
KNOWN_ARTISTS = [
    "Hayao Miyazaki", "Isao Takahata", "Claude Monet", "Vincent van Gogh", "Rembrandt", "Hokusai",
    "Alphonse Mucha", "Salvador Dali", "Rene Magritte", "John Singer Sargent", "Greg Rutkowski", "Syd Mead",
    "Edward Hopper", "Gustav Klimt", "J. M. W. Turner", "Caspar David Friedrich", "Frida Kahlo",
    "Johannes Vermeer", "Paul Cezanne", "Ivan Aivazovsky",
]


def make_modifiers(rng):
    phrases = []
    seen = set()

    def add(p):
        if p.lower() not in seen:
            seen.add(p.lower())
            phrases.append(p)

    for family in STYLE_FAMILIES.values():
        for m in family:
            if not m.startswith("by "):
                add(m)
    for m in GENERIC:
        add(m)
    for light in LIGHTING:
        add(f"{light} lighting")
    combos = [f"{a} {n}" for a in ADJECTIVES for n in NOUNS]
    rng.shuffle(combos)
    for c in combos:
        if len(phrases) >= 2000:
            break
        add(c)
    artists = list(KNOWN_ARTISTS)
    pool = [f"{f} {l}" for f in FIRST for l in LAST]
    rng.shuffle(pool)
    artists += pool[: 200 - len(artists)]
    return phrases, artists


def make_prompt(rng, index):
    subject = rng.choice(SUBJECTS)
    family = rng.choice(list(STYLE_FAMILIES))
    signature = rng.sample(STYLE_FAMILIES[family], k=rng.randint(2, 6))
    extra = rng.sample(GENERIC, k=rng.randint(0, 4))
    segments = [subject] + signature + extra
    if rng.random() < 0.15:
        segments = segments[: rng.randint(1, 5)]
    text = ", ".join(segments)
    if rng.random() < 0.02:
        text = text.replace(", ", ",\n", 1)
    nsfw = rng.betavariate(1.2, 18.0)
    if rng.random() < 0.08:
        nsfw = rng.uniform(0.1, 1.0)
    return {"id": f"dp{index:05d}", "text": text, "nsfw_score": round(nsfw, 4)}


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--prompts", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=20230504)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "prompts_sample.jsonl", "w", encoding="utf-8") as f:
        for i in range(args.prompts):
            f.write(json.dumps(make_prompt(rng, i + 1)) + "\n")

    phrases, artists = make_modifiers(rng)
    with open(args.out / "modifiers.tsv", "w", encoding="utf-8") as f:
        f.write("# phrase<TAB>category (phrase | artist)\n")
        for p in phrases:
            f.write(f"{p}\tphrase\n")
        for a in artists:
            f.write(f"{a}\tartist\n")
    print(f"wrote {args.prompts} prompts, {len(phrases)} phrases, {len(artists)} artists to {args.out}")


if __name__ == "__main__":
    main()
