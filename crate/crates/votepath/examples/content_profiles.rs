//! Profile a community by representative articles, deviating terms, and
//! publication domains.
//!
//! A small loyal community over-votes one outlet's articles against a
//! diffuse background, so its profile surfaces that outlet and its
//! headline vocabulary.
//!
//! Run with: `cargo run --example content_profiles`

use std::collections::BTreeMap;

use votepath::community::Partition;
use votepath::content::{
    community_profile, extract_domain, CommunityVotes, TermFrequencies, Tokenizer,
};
use votepath::corpus::{slice_window, ArticleMeta, VoteRecord, WindowSpec};

fn main() {
    // votes: 8 loyalists all vote 5 niche articles; 40 background users
    // spread over 20 general articles
    let mut votes = Vec::new();
    for user in 0..8 {
        for article in 0..5 {
            votes.push(VoteRecord {
                user_id: format!("loyal{user}"),
                article_id: format!("niche{article}"),
                timestamp: 10,
            });
        }
    }
    for user in 0..40 {
        for k in 0..3 {
            votes.push(VoteRecord {
                user_id: format!("casual{user:02}"),
                article_id: format!("general{:02}", (user + 7 * k) % 20),
                timestamp: 10,
            });
        }
    }

    let mut articles = BTreeMap::new();
    for a in 0..5 {
        articles.insert(
            format!("niche{a}"),
            ArticleMeta {
                article_id: format!("niche{a}"),
                posted_at: 0,
                category: "politics".into(),
                url: format!("http://www.lighthouse-review.example/story/{a}"),
                title: "lighthouse harbor dispatch".into(),
                summary: "harbor politics and lighthouse funding".into(),
            },
        );
    }
    for a in 0..20 {
        articles.insert(
            format!("general{a:02}"),
            ArticleMeta {
                article_id: format!("general{a:02}"),
                posted_at: 0,
                category: "politics".into(),
                url: format!("http://paper-{a}.example/x"),
                title: "assorted capital coverage".into(),
                summary: "daily capital coverage roundup".into(),
            },
        );
    }

    let slice = slice_window(
        &votes,
        0,
        WindowSpec {
            start: 0,
            length: 100,
            step: 100,
        },
    );
    // assign the loyalists and the casual crowd to their own communities
    let users: Vec<String> = slice.users.iter().cloned().collect();
    let labels: Vec<usize> = users
        .iter()
        .map(|u| usize::from(!u.starts_with("loyal")))
        .collect();
    let partition = Partition::from_labels(0, users, &labels, None);
    let loyal = partition.community_of("loyal0").expect("assigned");

    let counts = CommunityVotes::new(&slice, &partition).expect("consistent window");
    let hot = counts.top_articles(loyal, 3).expect("window has votes");
    println!("most over-represented articles of the loyal community:");
    for (article, score) in &hot {
        let observed = counts.observed_votes(article, loyal);
        let expected = counts.expected_votes(article, loyal).unwrap();
        println!("  {article}: O = {observed}, E = {expected:.2}, score = {score:.2}");
    }

    let tokenizer = Tokenizer::new();
    let window_terms = TermFrequencies::for_window(&slice, &articles, &tokenizer);
    let profile = community_profile(
        &counts,
        loyal,
        &articles,
        &tokenizer,
        &window_terms,
        50, // n_rep: articles feeding the term analysis
        10, // top articles kept in the profile
        8,  // top terms kept in the profile
    )
    .expect("profile");

    println!("\ntop terms by deviation from the window vocabulary:");
    for term in &profile.top_terms {
        println!("  {:<12} {:+.3}", term.term, term.score);
    }

    println!("\ndomain table over the top articles:");
    for (domain, count) in profile.domain_table() {
        println!("  {domain}: {count}");
    }

    println!("\ndomain normalization examples:");
    for url in [
        "http://www.lighthouse-review.example/story/1",
        "https://blog.writer.example/post?id=2",
        "not a url at all",
    ] {
        println!("  {url} → {}", extract_domain(url));
    }
}
