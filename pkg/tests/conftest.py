from datetime import datetime, timedelta

import pytest

from faqassist.corpus import Conversation, FaqDatabase, FaqItem, Utterance


def make_conversation(conv_id, entries, start=None):
    """Build a conversation from (sender, text) or (sender, text, gold)."""
    when = start or datetime(2019, 3, 12, 14, 0)
    utterances = []
    for index, entry in enumerate(entries):
        sender, text, *gold = entry
        utterances.append(
            Utterance(
                conversation_id=conv_id,
                index=index,
                timestamp=when + timedelta(minutes=index),
                sender=sender,
                text=text,
                gold=gold[0] if gold else "no-suggestion",
            )
        )
    return Conversation(conv_id, tuple(utterances))


@pytest.fixture
def faq_db():
    """Twelve FAQ items with deliberately disjoint keyword vocabularies."""
    topics = [
        (1, "Anmeldung", "Wie melde ich mich online an?",
         "Die Anmeldung läuft über das Onlineportal registrierung."),
        (2, "Kosten", "Was kostet die Teilnahme gebühr?",
         "Die Gebühr beträgt fünfzig Euro pauschal."),
        (3, "Zertifikat", "Gibt es ein Zertifikat nach Abschluss?",
         "Ja, ein Zertifikat wird nach Abschluss ausgestellt."),
        (4, "Dauer", "Wie lange dauert ein Praktikum üblicherweise?",
         "Ein Praktikum dauert sechs bis acht Wochen."),
        (5, "Orte", "Welche Städte stehen zur Auswahl bereit?",
         "Standorte gibt es in Hamburg und München."),
        (6, "Sprache", "Brauche ich Englischkenntnisse dafür?",
         "Englisch auf Konversationsniveau reicht aus."),
        (7, "Versicherung", "Bin ich während des Aufenthalts versichert?",
         "Eine Auslandskrankenversicherung ist enthalten."),
        (8, "Bewerbung", "Welche Unterlagen gehören zur Bewerbung?",
         "Lebenslauf und Motivationsschreiben genügen vollkommen."),
        (9, "Frist", "Bis wann läuft die Bewerbungsfrist überhaupt?",
         "Die Frist endet am dreißigsten April."),
        (10, "Unterkunft", "Wird eine Unterkunft vor Ort gestellt?",
         "Gastfamilien stellen die Unterkunft bereit."),
        (11, "Visum", "Benötige ich ein Visum für die Reise?",
         "Für EU Länder ist kein Visum erforderlich."),
        (12, "Kontakt", "Wen kann ich bei Rückfragen erreichen?",
         "Das Büro ist werktags telefonisch erreichbar."),
    ]
    return FaqDatabase(
        FaqItem(id=i, theme=t, question=q, answer=a) for i, t, q, a in topics
    )
